"""Numba kernels for mobile growth and the mobile -> map construction.

A mobile is grown depth-first so that white corners come out in contour
order.  Each corner stores its white vertex and label; the map edge of
corner ``c`` joins it to the next corner (cyclically) with label one less,
or to the extra vertex when the label is minimal.  Chord ``c`` owns
half-edges ``2c`` (at the corner) and ``2c + 1`` (at its successor).
"""
import numba as nb
import numpy as np

WHITE = 0
BLACK = 1

# status codes returned by the growth kernel
OK = 0
TOO_BIG = 1
TOO_SMALL = 2
REJECTED = 3


@nb.njit(cache=True, nogil=True)
def _geometric(rng, log_f):
    # P(j) = (1 - f) f**j by inversion; log_f = log(f) < 0
    if log_f == -np.inf:
        return 0
    u = 1.0 - rng.random()
    return int(np.floor(np.log(u) / log_f))


@nb.njit(cache=True, nogil=True)
def _half_degree(rng, cdf):
    """Inversion on the cumulative law of the half-degree; cdf[i] = P(k <= i + 1).
    Returns -1 when the draw lies beyond the table."""
    u = rng.random()
    n = cdf.shape[0]
    if u >= cdf[n - 1]:
        return -1
    lo, hi = 0, n - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cdf[mid] > u:
            hi = mid
        else:
            lo = mid + 1
    return lo + 1


@nb.njit(cache=True, nogil=True)
def _cyclic_labels(rng, k, start, out, offset):
    """Labels x_1..x_{k-1} following x_0 = start around a black vertex with k
    white neighbours, uniform among cycles with steps >= -1.

    Steps y_i - 1 where (y_0..y_{k-1}) is a uniform weak composition of k
    into k parts (k - 1 bars among 2k - 1 slots, selection sampling).
    """
    slots = 2 * k - 1
    bars_left = k - 1
    x = start
    y = 0
    written = 0
    for s in range(slots):
        if bars_left > 0 and rng.random() * (slots - s) < bars_left:
            bars_left -= 1
            x = x + y - 1
            out[offset + written] = x
            written += 1
            y = 0
        else:
            y += 1


@nb.njit(cache=True, nogil=True)
def grow_mobile(rng, log_f, cdf, root_black, max_edges, min_edges, unpointed,
                corner_vertex, corner_label, white_label, white_parent, black_degree, black_parent,
                pool, stack_kind, stack_id, stack_rem, stack_pos):
    """Grow one mobile into the preallocated buffers.

    root_black = 0: rooted at a white vertex of label 0 (pointed rooted maps).
    root_black = p > 0: rooted at a black vertex of half-degree p (p-maps).
    Returns (status, n_corners, n_white, n_black).
    """
    n_white = 0
    n_black = 0
    n_corner = 0
    edges = 0
    top = -1
    pool_top = 0

    if root_black == 0:
        white_label[0] = 0
        white_parent[0] = -1
        n_white = 1
        corner_vertex[0] = 0
        corner_label[0] = 0
        n_corner = 1
        top = 0
        stack_kind[0] = WHITE
        stack_id[0] = 0
        stack_rem[0] = _geometric(rng, log_f)
    else:
        p = root_black
        if p > max_edges:
            return TOO_BIG, 0, 0, 0
        edges = p
        black_degree[0] = p
        black_parent[0] = -1
        n_black = 1
        pool[0] = 0
        _cyclic_labels(rng, p, 0, pool, 1)
        top = 0
        stack_kind[0] = BLACK
        stack_id[0] = 0
        stack_rem[0] = p
        stack_pos[0] = 0
        pool_top = p

    while top >= 0:
        kind = stack_kind[top]
        if kind == WHITE:
            if stack_rem[top] > 0:
                stack_rem[top] -= 1
                k = _half_degree(rng, cdf)
                if k < 0 or edges + k > max_edges:
                    return TOO_BIG, n_corner, n_white, n_black
                edges += k
                b = n_black
                n_black += 1
                black_degree[b] = k
                black_parent[b] = stack_id[top]
                base = white_label[stack_id[top]]
                _cyclic_labels(rng, k, base, pool, pool_top)
                top += 1
                stack_kind[top] = BLACK
                stack_id[top] = b
                stack_rem[top] = k - 1
                stack_pos[top] = pool_top
                pool_top += k - 1
            else:
                top -= 1
        else:
            if stack_rem[top] > 0:
                stack_rem[top] -= 1
                lab = pool[stack_pos[top]]
                stack_pos[top] += 1
                w = n_white
                n_white += 1
                white_label[w] = lab
                white_parent[w] = stack_id[top]
                corner_vertex[n_corner] = w
                corner_label[n_corner] = lab
                n_corner += 1
                top += 1
                stack_kind[top] = WHITE
                stack_id[top] = w
                stack_rem[top] = _geometric(rng, log_f)
            else:
                top -= 1
                if top >= 0:
                    # corner of the parent white after this child returns;
                    # the root white skips the one that closes its contour
                    parent = stack_id[top]
                    if not (parent == 0 and root_black == 0 and stack_rem[top] == 0):
                        corner_vertex[n_corner] = parent
                        corner_label[n_corner] = white_label[parent]
                        n_corner += 1

    if edges < min_edges:
        return TOO_SMALL, n_corner, n_white, n_black
    if unpointed and rng.random() * (n_white + 1) >= 2.0:
        return REJECTED, n_corner, n_white, n_black
    return OK, n_corner, n_white, n_black


@nb.njit(cache=True, nogil=True)
def successors(corner_label, n):
    """succ[c] = next corner cyclically with label one less, -1 for minimal labels."""
    lo = corner_label[0]
    hi = corner_label[0]
    for i in range(n):
        v = corner_label[i]
        if v < lo:
            lo = v
        if v > hi:
            hi = v
    last = np.full(hi - lo + 2, -1, dtype=np.int64)
    succ = np.full(n, -1, dtype=np.int64)
    for i in range(2 * n - 1, -1, -1):
        c = i % n
        lab = corner_label[c] - lo
        if i < n and lab > 0:
            succ[c] = last[lab - 1]
        last[lab] = c
    return succ, lo


@nb.njit(cache=True, nogil=True)
def build_rotation(corner_vertex, corner_label, n, n_white):
    """Rotation system of the map encoded by the corner sequence.

    Around a white vertex its corners appear in contour order; inside one
    corner the incoming chords come nearest-source first, then the outgoing
    chord.  The extra vertex (id n_white) sees its chords in decreasing
    corner order.
    """
    succ, lo = successors(corner_label, n)
    m = 2 * n
    key = np.empty(m, dtype=np.int64)
    owner = np.empty(m, dtype=np.int64)
    span = n + 1
    for c in range(n):
        key[2 * c] = c * span + n
        owner[2 * c] = corner_vertex[c]
        s = succ[c]
        if s >= 0:
            key[2 * c + 1] = s * span + (s - c) % n
            owner[2 * c + 1] = corner_vertex[s]
        else:
            key[2 * c + 1] = n * span + (n - c)
            owner[2 * c + 1] = n_white
    order = np.argsort(key, kind="mergesort")
    first = np.full(n_white + 1, -1, dtype=np.int64)
    last = np.full(n_white + 1, -1, dtype=np.int64)
    sigma = np.empty(m, dtype=np.int64)
    for j in range(m):
        h = order[j]
        v = owner[h]
        if first[v] < 0:
            first[v] = h
        else:
            sigma[last[v]] = h
        last[v] = h
    for v in range(n_white + 1):
        if first[v] >= 0:
            sigma[last[v]] = first[v]
    dist = np.empty(n_white + 1, dtype=np.int64)
    for c in range(n):
        dist[corner_vertex[c]] = corner_label[c] - lo + 1
    dist[n_white] = 0
    return sigma, dist


class Buffers:
    """Scratch arrays reused across attempts."""

    def __init__(self, max_edges: int):
        n = max_edges + 2
        self.corner_vertex = np.empty(n, dtype=np.int64)
        self.corner_label = np.empty(n, dtype=np.int64)
        self.white_label = np.empty(n, dtype=np.int64)
        self.white_parent = np.empty(n, dtype=np.int64)
        self.black_degree = np.empty(n, dtype=np.int64)
        self.black_parent = np.empty(n, dtype=np.int64)
        self.pool = np.empty(2 * n, dtype=np.int64)
        self.stack_kind = np.empty(2 * n, dtype=np.int64)
        self.stack_id = np.empty(2 * n, dtype=np.int64)
        self.stack_rem = np.empty(2 * n, dtype=np.int64)
        self.stack_pos = np.empty(2 * n, dtype=np.int64)

    def args(self):
        return (self.corner_vertex, self.corner_label, self.white_label, self.white_parent,
                self.black_degree, self.black_parent, self.pool,
                self.stack_kind, self.stack_id, self.stack_rem, self.stack_pos)


@nb.njit(cache=True, nogil=True)
def sample_loop(rng, log_f, cdf, root_black, max_edges, min_edges, unpointed, max_attempts,
                corner_vertex, corner_label, white_label, white_parent, black_degree, black_parent,
                pool, stack_kind, stack_id, stack_rem, stack_pos):
    """Retry grow_mobile until it lands in the window.
    Returns (status, attempts, n_corners, n_white, n_black)."""
    status = TOO_SMALL
    nc = nw = nb_ = 0
    for attempt in range(1, max_attempts + 1):
        status, nc, nw, nb_ = grow_mobile(
            rng, log_f, cdf, root_black, max_edges, min_edges, unpointed,
            corner_vertex, corner_label, white_label, white_parent, black_degree, black_parent,
            pool, stack_kind, stack_id, stack_rem, stack_pos)
        if status == OK:
            return status, attempt, nc, nw, nb_
    return status, max_attempts, nc, nw, nb_
