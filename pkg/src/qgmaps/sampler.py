"""Boltzmann bipartite maps from labelled mobiles, and loop-decorated
quadrangulations built by filling the large faces of a sampled gasket.

Mobiles are two-type Galton-Watson trees.  A white vertex has a geometric
number of black children, P(j) = (1 - f) f**j with f = 1 - 4 beta; a black
vertex of half-degree k (k - 1 white children) occurs with probability
binom(2k-1, k) q0_k 4**-(k-1) / f0(1).  Labels around a black vertex are a
uniform cycle with steps >= -1.  Sizes are conditioned by rejection into an
edge window.  Unpointed maps are obtained by accepting a pointed sample with
probability 2/V.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .analysis import ScalingSample
from .errors import (
    AttemptsExhausted,
    BijectionViolation,
    DegenerateWeights,
    OutOfRange,
    RecursionBudgetExceeded,
    ValidationError,
)
from .gasket import EMPTY, DecoratedQuadrangulation, QuadAnnotation, _frozen
from .maps import BallProfile, BoundaryMap, PlanarMap
from .weights import WeightSequence

DEFAULT_MAX_ATTEMPTS = 10**7


def make_rng(seed: int) -> np.random.Generator:
    """The documented generator: Philox4x64 keyed by a 64-bit integer seed."""
    return np.random.Generator(np.random.Philox(int(seed)))


def derived_seed(master: int, *key: int) -> int:
    """Per-task 64-bit seed, independent of scheduling."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class SampleSpec:
    weights: WeightSequence
    size_window: tuple[int, int]
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    seed: int = 0
    marked: bool = True

    def __post_init__(self):
        lo, hi = (int(v) for v in self.size_window)
        if not 1 <= lo <= hi:
            raise ValidationError(f"size window {self.size_window} needs 1 <= E_min <= E_max")
        object.__setattr__(self, "size_window", (lo, hi))
        if self.max_attempts < 1:
            raise ValidationError("max_attempts must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must fit in 64 bits")

    def with_window(self, window) -> "SampleSpec":
        return SampleSpec(self.weights, tuple(window), self.max_attempts, self.seed, self.marked)

    def with_seed(self, seed: int) -> "SampleSpec":
        return SampleSpec(self.weights, self.size_window, self.max_attempts, seed, self.marked)


@dataclass(frozen=True)
class LoopParams:
    n: float
    h0: float
    h1: float
    h2: float
    recursion_floor: int = 2
    max_depth: int = 64
    edge_budget: int = 2 * 10**5

    def __post_init__(self):
        if not 0.0 <= self.n <= 2.0:
            raise OutOfRange(f"loop weight n={self.n} outside [0, 2]")
        if min(self.h0, self.h1, self.h2) < 0:
            raise OutOfRange("quad weights must be nonnegative")
        if self.recursion_floor < 0 or self.max_depth < 0 or self.edge_budget < 1:
            raise ValidationError("recursion_floor, max_depth and edge_budget must be nonnegative")

    @property
    def beta(self) -> float:
        return self.h1 + 2.0 * self.h2

    @property
    def trans_probability(self) -> float:
        return self.h1 / self.beta


def _offspring_tables(weights: WeightSequence, max_edges: int):
    """(log f, cumulative half-degree law) covering at least ``max_edges``;
    one table per weight sequence, grown by doubling."""
    cached = weights._cache.get("offspring")
    if cached is not None and cached[2] >= max_edges:
        return cached
    f = weights.white_offspring_parameter
    if not 0.0 < f < 1.0:
        raise DegenerateWeights(f"white offspring parameter {f} outside (0, 1)")
    size = 1024
    while size < max_edges:
        size *= 2
    pmf = weights.black_offspring_pmf(size)
    if not np.all(np.isfinite(pmf)) or np.any(pmf < 0):
        raise DegenerateWeights("black offspring law has invalid entries")
    total = math.fsum(pmf)
    if total > 1.0 + 1e-9:
        raise DegenerateWeights(f"black offspring law has mass {total} > 1")
    cdf = np.cumsum(pmf)
    support = weights.base.support_max
    if support is not None and support <= size:
        cdf = np.minimum(cdf / cdf[-1], 1.0)
    out = (math.log(f), cdf, size)
    weights._cache["offspring"] = out
    return out


@dataclass(frozen=True, eq=False)
class Mobile:
    """Labelled two-type tree, stored as its white-corner sequence in contour
    order together with the parent structure."""

    corner_vertex: np.ndarray
    corner_label: np.ndarray
    white_label: np.ndarray
    white_parent: np.ndarray
    black_degree: np.ndarray
    black_parent: np.ndarray
    boundary: int  # half-degree of the root black vertex, 0 for a white root
    sign: int  # orientation of the root edge
    root_offset: int  # root position along the boundary face
    attempts: int
    seed: int

    @property
    def n_edges(self) -> int:
        return int(self.corner_vertex.shape[0])

    @property
    def n_white(self) -> int:
        return int(self.white_label.shape[0])

    def to_bytes(self) -> bytes:
        head = np.array([self.boundary, self.sign, self.root_offset, self.n_edges,
                         self.n_white, self.black_degree.shape[0]], dtype=np.int64)
        parts = (head, self.corner_vertex, self.corner_label, self.white_label,
                 self.white_parent, self.black_degree, self.black_parent)
        return b"".join(np.ascontiguousarray(p, dtype="<i8").tobytes() for p in parts)


def sample_mobile(spec: SampleSpec, *, boundary: int = 0, rng: np.random.Generator | None = None) -> Mobile:
    """Draw a mobile whose map has E in the window.  ``boundary = p > 0``
    roots the tree at a black vertex of half-degree p (maps with a 2p-gon
    boundary face)."""
    if rng is None:
        rng = make_rng(spec.seed)
    lo, hi = spec.size_window
    log_f, cdf, _ = _offspring_tables(spec.weights, hi)
    buf = K.Buffers(hi)
    status, attempts, nc, nw, nb = K.sample_loop(
        rng, log_f, cdf, int(boundary), hi, lo, not spec.marked, spec.max_attempts, *buf.args())
    if status != K.OK:
        raise AttemptsExhausted(f"no map in window {spec.size_window} after {attempts} attempts")
    sign = int(rng.integers(2))
    offset = int(rng.integers(2 * boundary)) if boundary else 0
    return Mobile(
        corner_vertex=buf.corner_vertex[:nc].copy(),
        corner_label=buf.corner_label[:nc].copy(),
        white_label=buf.white_label[:nw].copy(),
        white_parent=buf.white_parent[:nw].copy(),
        black_degree=buf.black_degree[:nb].copy(),
        black_parent=buf.black_parent[:nb].copy(),
        boundary=int(boundary),
        sign=sign,
        root_offset=offset,
        attempts=int(attempts),
        seed=int(spec.seed),
    )


@dataclass(frozen=True, eq=False)
class LabelledMap:
    """Pointed map with the distance of every vertex to the marked vertex."""

    map: PlanarMap
    distances: np.ndarray
    boundary: BoundaryMap | None = None

    def ball_profile(self) -> BallProfile:
        counts = np.bincount(self.distances)
        return BallProfile(np.arange(counts.shape[0]), np.cumsum(counts),
                           int(self.map.marked_vertex), self.map.n_edges)


def _face_cycle(sigma: np.ndarray, start: int) -> list[int]:
    out = [start]
    h = int(sigma[start ^ 1])
    while h != start:
        out.append(h)
        h = int(sigma[h ^ 1])
    return out


def mobile_to_map(mobile: Mobile, *, check: bool = False) -> LabelledMap:
    """Rooted pointed map of a mobile.  With ``check`` the label distances are
    compared with breadth-first search and the face degrees with the black
    vertices (BijectionViolation on any mismatch)."""
    n = mobile.n_edges
    sigma, dist = K.build_rotation(mobile.corner_vertex, mobile.corner_label, n, mobile.n_white)
    if mobile.boundary:
        # the target end of the last corner's edge lies on the root black's face
        cycle = _face_cycle(sigma, 2 * n - 1)
        root = cycle[mobile.root_offset]
    else:
        root = mobile.sign
    c_min = int(np.argmin(mobile.corner_label))
    tmp = PlanarMap(sigma, root)
    vof = tmp.vertex_of
    marked = int(vof[2 * c_min + 1])
    m = PlanarMap(tmp.sigma, root, marked)
    m._derived.update(tmp._derived)
    d = np.empty(m.n_vertices, dtype=np.int64)
    d[vof[2 * np.arange(n)]] = dist[mobile.corner_vertex]
    d[marked] = 0
    bm = BoundaryMap.from_map(m) if mobile.boundary else None
    if check:
        if not np.array_equal(d, m.distances_from(marked)):
            raise BijectionViolation("label distances differ from graph distances")
        if sorted(m.face_degrees.tolist()) != sorted((2 * mobile.black_degree).tolist()):
            raise BijectionViolation("face degrees differ from black vertex degrees")
        if bm is not None and bm.p != mobile.boundary:
            raise BijectionViolation("root is not on the boundary face")
    return LabelledMap(m, d, bm)


def sample_map(spec: SampleSpec, *, boundary: int = 0, check: bool = False,
               rng: np.random.Generator | None = None) -> LabelledMap:
    return mobile_to_map(sample_mobile(spec, boundary=boundary, rng=rng), check=check)


# loop-decorated quadrangulations

class _Assembly:
    """Darts with a successor along their face and an opposite dart; faces are
    cut out and glued by re-pairing opposites."""

    def __init__(self):
        self.nxt: list[int] = []
        self.opp: list[int] = []
        self.alive: list[bool] = []
        self.crossings: list[tuple[int, int]] = []

    def __len__(self):
        return len(self.nxt)

    def add_map(self, m: PlanarMap) -> int:
        off = len(self.nxt)
        he = np.arange(m.half_edge_count)
        self.nxt.extend((m.phi + off).tolist())
        self.opp.extend(((he ^ 1) + off).tolist())
        self.alive.extend([True] * m.half_edge_count)
        return off

    def cycle(self, n: int) -> list[int]:
        off = len(self.nxt)
        ids = list(range(off, off + n))
        self.nxt.extend(ids[1:] + ids[:1])
        self.opp.extend([-1] * n)
        self.alive.extend([True] * n)
        return ids

    def pair(self, a: int, b: int) -> None:
        self.opp[a] = b
        self.opp[b] = a

    def face(self, start: int) -> list[int]:
        out = [start]
        h = self.nxt[start]
        while h != start:
            out.append(h)
            h = self.nxt[h]
        return out

    def rim(self, outer: list[int], word: list[str], inner: list[int]) -> None:
        """Replace the face ``outer`` by a ring of quads around ``inner``."""
        size = len(word)
        quads = [self.cycle(4) for _ in range(size)]
        replace: dict = {}
        entries, exits = [], []
        j = m = 0
        for q, step in zip(quads, word):
            if step == "T":
                replace[outer[j]] = q[0]
                self.pair(q[2], inner[m])
                exits.append(q[1])
                entries.append(q[3])
                j += 1
                m += 1
            elif step == "O":
                replace[outer[j]] = q[0]
                replace[outer[j + 1]] = q[1]
                exits.append(q[2])
                entries.append(q[3])
                j += 2
            else:
                self.pair(q[1], inner[m + 1])
                self.pair(q[2], inner[m])
                exits.append(q[0])
                entries.append(q[3])
                m += 2
            self.crossings.append((exits[-1], entries[-1]))
        for t in range(size):
            self.pair(exits[t], entries[(t + 1) % size])
        for e, q in replace.items():
            other = self.opp[e]
            self.pair(q, replace.get(other, other))
            self.alive[e] = False

    def glue(self, hole: list[int], border: list[int]) -> None:
        """Identify the face ``hole`` with the face ``border`` (opposite
        orientations, hole[0] against border[0]) and drop both."""
        size = len(hole)
        match = {hole[j]: border[(-j) % size] for j in range(size)}
        back = {b: h for h, b in match.items()}
        for h in hole:
            a = self.opp[h]
            z = self.opp[match[h]]
            if z in back:
                z = self.opp[back[z]]
            self.pair(a, z)
        for d in list(hole) + list(border):
            self.alive[d] = False

    def to_map(self, root: int) -> tuple[PlanarMap, np.ndarray]:
        alive = np.flatnonzero(np.asarray(self.alive))
        opp = np.asarray(self.opp)
        nxt = np.asarray(self.nxt)
        new = np.full(len(self.nxt), -1, dtype=np.int64)
        e = 0
        for d in alive:
            if new[d] < 0:
                new[d] = 2 * e
                new[opp[d]] = 2 * e + 1
                e += 1
        sigma = np.empty(2 * e, dtype=np.int64)
        # sigma(y) = phi(alpha(y))
        sigma[new[alive]] = new[nxt[opp[alive]]]
        return PlanarMap(sigma, int(new[root])), new


def _fan(k: int) -> PlanarMap:
    """Filler for a 2k-gon: the single edge for k = 1, else a fan of k - 1 quads;
    rooted on its boundary face."""
    if k == 1:
        return PlanarMap(np.array([0, 1]), 0)
    from .maps import build_from_face_lists

    faces = [list(range(2 * k - 1, -1, -1))]
    for i in range(k - 1):
        faces.append([0, 2 * i + 1, 2 * i + 2, (2 * i + 3) % (2 * k)])
    return build_from_face_lists(faces, root=(1, 0))


def rim_word(rng: np.random.Generator, size: int, trans_probability: float) -> list[str]:
    """Ring of ``size`` quads, each trans with the given probability and cis
    otherwise, conditioned on an even number of cis quads; half of the cis
    quads (uniformly chosen) sit on the outer side ("O"), half on the inner
    side ("I"), so both boundaries of the ring have length ``size``."""
    while True:
        trans = rng.random(size) < trans_probability
        n_cis = int(size - trans.sum())
        if n_cis % 2 == 0:
            break
    word = np.where(trans, "T", "I").astype("<U1")
    cis = np.flatnonzero(~trans)
    word[rng.permutation(cis)[: n_cis // 2]] = "O"
    return word.tolist()


@dataclass(frozen=True, eq=False)
class DecoratedSample:
    decorated: DecoratedQuadrangulation
    gasket: LabelledMap
    holes: int
    depth: int


def _holes(m: PlanarMap, boundary_face: int) -> list[list[int]]:
    faces = m.faces()
    return [cyc for f, cyc in enumerate(faces) if f != boundary_face and len(cyc) != 4]


def sample_decorated_quadrangulation(params: LoopParams, spec: SampleSpec, *, boundary: int = 2,
                                     rng: np.random.Generator | None = None,
                                     max_restarts: int = 100) -> DecoratedSample:
    """Sample a gasket p-map from ``spec.weights`` and fill each face of
    half-degree k != 2 by a ring of 2k loop quads around a hole of the same
    length.  Holes above ``params.recursion_floor`` are filled recursively
    with a Boltzmann p-map (up to ``params.max_depth`` levels); the others
    with a fan of empty quads."""
    if rng is None:
        rng = make_rng(spec.seed)
    weights = spec.weights
    has_large = weights.base.support_max != 2 or any(
        weights.base.term(k) > 0 for k in range(1, 2))
    if params.n == 0.0 and has_large:
        raise DegenerateWeights("n = 0 allows no loops; the weights must charge quads only")
    if has_large and params.beta <= 0:
        raise DegenerateWeights("h1 + 2 h2 must be positive to draw loop rings")
    last_error: Exception | None = None
    for _ in range(max_restarts):
        gasket = sample_map(spec, boundary=boundary, rng=rng)
        try:
            dq, holes, depth = _decorate(gasket, params, spec, rng)
        except RecursionBudgetExceeded as exc:
            last_error = exc
            continue
        return DecoratedSample(dq, gasket, holes, depth)
    raise RecursionBudgetExceeded(f"{max_restarts} restarts exceeded the edge budget") from last_error


def _decorate(gasket: LabelledMap, params: LoopParams, spec: SampleSpec, rng):
    asm = _Assembly()
    gm = gasket.map
    off = asm.add_map(gm)
    root = gm.root + off
    queue = [([h + off for h in cyc], 0) for cyc in _holes(gm, gasket.boundary.boundary_face)]
    n_holes = 0
    max_depth = 0
    budget = 2 * params.edge_budget
    inner_spec_base = SampleSpec(spec.weights, (1, 1), spec.max_attempts, 0, marked=False)
    while queue:
        outer, depth = queue.pop()
        n_holes += 1
        max_depth = max(max_depth, depth)
        k = len(outer) // 2
        start = int(rng.integers(2 * k))
        outer = outer[start:] + outer[:start]
        inner = asm.cycle(2 * k)
        asm.rim(outer, rim_word(rng, 2 * k, params.trans_probability), inner)
        if k <= params.recursion_floor or depth >= params.max_depth:
            filler = _fan(k)
        else:
            room = (budget - len(asm)) // 2
            if room < k:
                raise RecursionBudgetExceeded("edge budget exhausted")
            try:
                filler_lm = sample_map(inner_spec_base.with_window((k, room)), boundary=k, rng=rng)
            except AttemptsExhausted:
                raise RecursionBudgetExceeded("inner map does not fit the edge budget") from None
            filler = filler_lm.map
        o = asm.add_map(filler)
        border = asm.face(filler.root + o)
        asm.glue(inner, border)
        if filler.n_faces > 2 or k > 2:
            bface = int(filler.face_of[filler.root])
            for cyc in _holes(filler, bface):
                queue.append(([h + o for h in cyc], depth + 1))
        if len(asm) > budget:
            raise RecursionBudgetExceeded("edge budget exhausted")
    m, new = asm.to_map(root)
    faces = m.faces()
    ann = {}
    for a, b in asm.crossings:
        f = int(m.face_of[new[a]])
        cyc = faces[f]
        ann[f] = QuadAnnotation.from_crossed(cyc.index(int(new[a])), cyc.index(int(new[b])))
    bface = int(m.face_of[m.root])
    annotations = tuple(ann.get(f, EMPTY) for f in range(m.n_faces) if f != bface)
    dq = DecoratedQuadrangulation(BoundaryMap.from_map(m), annotations)
    return dq, n_holes, max_depth


# campaigns

@dataclass
class CampaignResult:
    samples: list = field(default_factory=list)
    profiles: list = field(default_factory=list)
    failures: list = field(default_factory=list)  # (window index, sample index, message)


def _one_sample(spec: SampleSpec, w: int, i: int, window, master: int, with_profile: bool, check: bool):
    seed = derived_seed(master, w, i)
    sub = spec.with_window(window).with_seed(seed)
    try:
        mob = sample_mobile(sub)
    except AttemptsExhausted as exc:
        return None, None, str(exc)
    if check:
        lm = mobile_to_map(mob, check=True)
        dist = lm.distances
    else:
        lo = mob.corner_label.min()
        dist = np.empty(mob.n_white + 1, dtype=np.int64)
        dist[mob.corner_vertex] = mob.corner_label - lo + 1
        dist[-1] = 0
    others = dist[dist > 0]
    rec = ScalingSample(
        edges=mob.n_edges,
        mean_distance=float(others.mean()),
        max_distance=int(others.max()),
        seed=seed,
        window=w,
        vertices=int(dist.shape[0]),
    )
    prof = None
    if with_profile:
        counts = np.bincount(dist)
        prof = BallProfile(np.arange(counts.shape[0]), np.cumsum(counts), -1, mob.n_edges)
    return rec, prof, None


def sampling_campaign(spec: SampleSpec, sizes, per_size: int, *, threads: int | None = None,
                      profiles: bool = True, check: bool = False) -> CampaignResult:
    """Independent samples in each window; sample (w, i) uses the seed derived
    from (spec.seed, w, i), and results are ordered by (w, i), so the output
    does not depend on ``threads``."""
    windows = [tuple(int(x) for x in s) for s in sizes]
    tasks = [(w, i, win) for w, win in enumerate(windows) for i in range(per_size)]
    result = CampaignResult()
    if not tasks:
        return result
    for win in windows:
        spec.with_window(win)  # validate
    threads = threads or os.cpu_count() or 1

    def run(task):
        w, i, win = task
        return _one_sample(spec, w, i, win, spec.seed, profiles, check)

    if threads == 1:
        outs = [run(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outs = list(pool.map(run, tasks))
    for (w, i, _), (rec, prof, err) in zip(tasks, outs):
        if err is not None:
            result.failures.append((w, i, err))
            continue
        result.samples.append(rec)
        if prof is not None:
            result.profiles.append(prof)
    return result
