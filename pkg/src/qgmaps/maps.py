"""Half-edge planar maps.

A map with E edges has half-edges ``0..2E-1``.  Half-edge ``h`` and ``h ^ 1``
form an edge (the involution ``alpha`` is implicit).  ``sigma[h]`` is the next
half-edge counterclockwise around the origin of ``h``; faces are the orbits of
``phi = sigma o alpha``, so ``phi[h] = sigma[h ^ 1]`` follows ``h`` along its
face.  Vertex and face ids are orbit indices ordered by the smallest
half-edge in each orbit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .errors import IncoherentRotation, NonPlanar, ParseError, ValidationError

FORMAT_VERSION = "PMAP-JSON v1"


@nb.njit(cache=True, nogil=True)
def _orbit_ids(perm):
    """Canonical orbit index of every element (orbits numbered by min element)."""
    n = perm.shape[0]
    ids = np.full(n, -1, dtype=np.int64)
    count = 0
    for h in range(n):
        if ids[h] >= 0:
            continue
        x = h
        while ids[x] < 0:
            ids[x] = count
            x = perm[x]
        count += 1
    return ids, count


@nb.njit(cache=True, nogil=True)
def _csr(vertex_of, n_vertices):
    """Half-edges grouped by origin vertex."""
    n = vertex_of.shape[0]
    offsets = np.zeros(n_vertices + 1, dtype=np.int64)
    for h in range(n):
        offsets[vertex_of[h] + 1] += 1
    for v in range(n_vertices):
        offsets[v + 1] += offsets[v]
    fill = offsets[:-1].copy()
    nbrs = np.empty(n, dtype=np.int64)
    for h in range(n):
        v = vertex_of[h]
        nbrs[fill[v]] = vertex_of[h ^ 1]
        fill[v] += 1
    return offsets, nbrs


@nb.njit(cache=True, nogil=True)
def bfs_csr(offsets, nbrs, source):
    nv = offsets.shape[0] - 1
    dist = np.full(nv, -1, dtype=np.int64)
    queue = np.empty(nv, dtype=np.int64)
    dist[source] = 0
    queue[0] = source
    head, tail = 0, 1
    while head < tail:
        v = queue[head]
        head += 1
        dv = dist[v] + 1
        for j in range(offsets[v], offsets[v + 1]):
            w = nbrs[j]
            if dist[w] < 0:
                dist[w] = dv
                queue[tail] = w
                tail += 1
    return dist


@nb.njit(cache=True, nogil=True)
def _rooted_code(sigma, root):
    """Relabel half-edges in breadth-first order from the root; the relabelled
    sigma is a complete invariant of the rooted map."""
    n = sigma.shape[0]
    new = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    new[root] = 0
    order[0] = root
    head, tail = 0, 1
    while head < tail:
        h = order[head]
        head += 1
        for g in (sigma[h], h ^ 1):
            if new[g] < 0:
                new[g] = tail
                order[tail] = g
                tail += 1
    code = np.empty(2 * n, dtype=np.int64)
    for i in range(n):
        h = order[i]
        code[2 * i] = new[sigma[h]]
        code[2 * i + 1] = new[h ^ 1]
    return code, new


def _check_permutation(sigma: np.ndarray) -> None:
    n = sigma.shape[0]
    if n == 0 or n % 2:
        raise ValidationError(f"half-edge count {n} must be positive and even")
    bad = np.flatnonzero((sigma < 0) | (sigma >= n))
    if bad.size:
        raise ValidationError("sigma entry out of range", int(bad[0]))
    _, first = np.unique(sigma, return_index=True)
    if first.size != n:
        # first position repeating an earlier value
        repeat = np.ones(n, dtype=bool)
        repeat[first] = False
        raise ValidationError("sigma is not a permutation", int(np.flatnonzero(repeat)[0]))


@dataclass(frozen=True, eq=False)
class PlanarMap:
    """Rooted planar map; validated (permutation, connectivity, Euler) on construction."""

    sigma: np.ndarray
    root: int = 0
    marked_vertex: int | None = None
    face_annotations: tuple | None = None
    _derived: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        sigma = np.ascontiguousarray(self.sigma, dtype=np.int64)
        object.__setattr__(self, "sigma", sigma)
        sigma.setflags(write=False)
        _check_permutation(sigma)
        if not 0 <= self.root < sigma.shape[0]:
            raise ValidationError("root half-edge out of range", self.root)
        if self.marked_vertex is not None and not 0 <= self.marked_vertex < self.n_vertices:
            raise ValidationError("marked vertex out of range", self.marked_vertex)
        chi = self.n_vertices - self.n_edges + self.n_faces
        if chi != 2:
            raise NonPlanar(f"V - E + F = {chi}, expected 2")
        if np.any(self.distances_from(0) < 0):
            raise NonPlanar("map is not connected")

    # derived structure, computed once
    def _get(self, key):
        d = self._derived
        if key not in d:
            if key in ("vertex_of", "n_vertices"):
                d["vertex_of"], d["n_vertices"] = _orbit_ids(self.sigma)
            elif key in ("face_of", "n_faces"):
                d["face_of"], d["n_faces"] = _orbit_ids(self.phi)
            elif key == "phi":
                d["phi"] = self.sigma[np.arange(self.sigma.shape[0]) ^ 1]
            elif key == "csr":
                d["csr"] = _csr(self.vertex_of, self.n_vertices)
        return d[key]

    @property
    def half_edge_count(self) -> int:
        return int(self.sigma.shape[0])

    @property
    def n_edges(self) -> int:
        return self.half_edge_count // 2

    @property
    def phi(self) -> np.ndarray:
        return self._get("phi")

    @property
    def vertex_of(self) -> np.ndarray:
        return self._get("vertex_of")

    @property
    def face_of(self) -> np.ndarray:
        return self._get("face_of")

    @property
    def n_vertices(self) -> int:
        return int(self._get("n_vertices"))

    @property
    def n_faces(self) -> int:
        return int(self._get("n_faces"))

    @property
    def face_degrees(self) -> np.ndarray:
        return np.bincount(self.face_of, minlength=self.n_faces)

    @property
    def vertex_degrees(self) -> np.ndarray:
        return np.bincount(self.vertex_of, minlength=self.n_vertices)

    @property
    def root_vertex(self) -> int:
        return int(self.vertex_of[self.root])

    def is_bipartite(self) -> bool:
        return bool(np.all(self.face_degrees % 2 == 0))

    def face_half_edges(self, face: int) -> list[int]:
        """Half-edges of a face in traversal order, starting at its minimal one."""
        start = int(np.flatnonzero(self.face_of == face)[0])
        out = [start]
        h = int(self.phi[start])
        while h != start:
            out.append(h)
            h = int(self.phi[h])
        return out

    def faces(self) -> list[list[int]]:
        """All faces as half-edge cycles, indexed by face id."""
        phi = self.phi
        out: list[list[int]] = [[] for _ in range(self.n_faces)]
        done = np.zeros(self.half_edge_count, dtype=bool)
        for h0 in range(self.half_edge_count):
            if done[h0]:
                continue
            f = out[self.face_of[h0]]
            h = h0
            while not done[h]:
                done[h] = True
                f.append(h)
                h = int(phi[h])
        return out

    def distances_from(self, source: int) -> np.ndarray:
        offsets, nbrs = self._get("csr")
        return bfs_csr(offsets, nbrs, int(source))

    def rooted_code(self) -> bytes:
        return _rooted_code(self.sigma, self.root)[0].tobytes()

    def pointed_code(self) -> bytes:
        """Rooted code followed by the canonical position of the marked vertex."""
        if self.marked_vertex is None:
            raise ValidationError("map has no marked vertex")
        code, new = _rooted_code(self.sigma, self.root)
        at = int(new[self.vertex_of == self.marked_vertex].min())
        return code.tobytes() + np.int64(at).tobytes()

    def with_root(self, root: int) -> "PlanarMap":
        return PlanarMap(self.sigma, root, self.marked_vertex, self.face_annotations)


@dataclass(frozen=True)
class BoundaryMap:
    """Map whose root half-edge lies on the distinguished boundary face."""

    map: PlanarMap
    boundary_face: int
    p: int

    @classmethod
    def from_map(cls, m: PlanarMap) -> "BoundaryMap":
        f = int(m.face_of[m.root])
        deg = int(m.face_degrees[f])
        if deg % 2:
            raise ValidationError("boundary face has odd degree", f)
        return cls(m, f, deg // 2)


@dataclass(frozen=True)
class BallProfile:
    radii: np.ndarray
    volumes: np.ndarray
    source: int
    map_size: int


def build_from_face_lists(faces, root=None, *, marked_vertex=None, return_index=False):
    """Build a map from face boundaries given as vertex cycles.

    Every directed edge ``(u, v)`` must occur in exactly one cycle and its
    reverse in another (or the same) one.  Edges are numbered by first
    appearance; the direction seen first gets the even half-edge.  ``root`` is
    a directed edge ``(u, v)``, a half-edge id, or None for half-edge 0.
    With ``return_index`` the directed-edge -> half-edge dict is returned too.
    """
    index: dict = {}
    succ: dict = {}
    next_id = 0
    for cycle in faces:
        cycle = list(cycle)
        if len(cycle) < 1:
            raise IncoherentRotation("empty face cycle")
        d = len(cycle)
        for i in range(d):
            u, v, w = cycle[i], cycle[(i + 1) % d], cycle[(i + 2) % d]
            if (u, v) in succ:
                raise IncoherentRotation(f"directed edge {(u, v)} used twice")
            succ[(u, v)] = (v, w)
            if (u, v) not in index:
                index[(u, v)] = next_id
                index[(v, u)] = next_id + 1
                next_id += 2
    missing = [e for e in index if e not in succ]
    if missing:
        raise IncoherentRotation(f"directed edge {missing[0]} is not on any face")
    n = next_id
    sigma = np.empty(n, dtype=np.int64)
    # phi(h) = sigma(h ^ 1): the successor of (u, v) on its face leaves v
    for (u, v), nxt in succ.items():
        sigma[index[(v, u)]] = index[nxt]
    if root is None:
        r = 0
    elif isinstance(root, tuple):
        if root not in index:
            raise ValidationError(f"root edge {root} not in map")
        r = index[root]
    else:
        r = int(root)
    try:
        _check_permutation(sigma)
    except ValidationError as exc:
        raise IncoherentRotation(str(exc)) from None
    m = PlanarMap(sigma, r)
    if marked_vertex is not None:
        v = int(m.vertex_of[index[next(e for e in index if e[0] == marked_vertex)]])
        m = PlanarMap(sigma, r, v)
    return (m, index) if return_index else m


def bfs_distances(m: PlanarMap, source: int | None = None) -> np.ndarray:
    """Graph distances from ``source`` (default: the root vertex)."""
    return m.distances_from(m.root_vertex if source is None else source)


def ball_profile(m: PlanarMap, source: int | None = None) -> BallProfile:
    src = m.root_vertex if source is None else int(source)
    dist = m.distances_from(src)
    counts = np.bincount(dist)
    radii = np.arange(counts.shape[0])
    return BallProfile(radii=radii, volumes=np.cumsum(counts), source=src, map_size=m.n_edges)


# PMAP-JSON v1

def to_document(m: PlanarMap) -> dict:
    doc = {"half_edges": m.half_edge_count, "root": int(m.root), "sigma": m.sigma.tolist()}
    if m.face_annotations is not None:
        doc["face_annotations"] = [a if isinstance(a, int) else list(a) for a in m.face_annotations]
    if m.marked_vertex is not None:
        doc["marked_vertex"] = int(m.marked_vertex)
    return doc


def serialize(m: PlanarMap) -> str:
    """Canonical text: sorted keys, no whitespace, trailing newline."""
    return json.dumps(to_document(m), sort_keys=True, separators=(",", ":")) + "\n"


def _int(value, what):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{what} must be an integer")
    return value


def from_document(doc) -> PlanarMap:
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    for key in ("half_edges", "sigma", "root"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}")
    n = _int(doc["half_edges"], "half_edges")
    sigma = doc["sigma"]
    if not isinstance(sigma, list):
        raise ParseError("sigma must be an array")
    for i, s in enumerate(sigma):
        if isinstance(s, bool) or not isinstance(s, int):
            raise ParseError(f"sigma[{i}] is not an integer")
    if len(sigma) != n:
        raise ValidationError(f"sigma has length {len(sigma)}, expected {n}", min(len(sigma), n))
    root = _int(doc["root"], "root")
    marked = doc.get("marked_vertex")
    if marked is not None:
        _int(marked, "marked_vertex")
    ann = doc.get("face_annotations")
    if ann is not None:
        if not isinstance(ann, list):
            raise ParseError("face_annotations must be an array")
        ann = tuple(a if isinstance(a, int) else tuple(a) for a in ann)
    return PlanarMap(np.asarray(sigma, dtype=np.int64), root, marked, ann)


def deserialize(text: str | bytes) -> PlanarMap:
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"malformed PMAP-JSON: {exc}") from None
    return from_document(doc)


def load(path) -> PlanarMap:
    with open(path, "rb") as fh:
        return deserialize(fh.read())


def save(m: PlanarMap, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(m))
