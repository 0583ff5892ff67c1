"""Loop decorations on quadrangulations with a boundary, and their gaskets.

Each internal quad carries an annotation saying which of its four edges the
dual loop crosses.  Edge positions 0..3 follow the face from its smallest
half-edge.  Trans(axis) crosses positions ``axis`` and ``axis + 2``;
Cis(corner) crosses ``corner`` and ``corner + 1`` (mod 4).
"""
from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InconsistentCrossing, OddDegree, OpenStrand, ValidationError
from .maps import BoundaryMap, PlanarMap


class QuadKind(enum.IntEnum):
    EMPTY = 0
    TRANS = 1
    CIS = 2


@dataclass(frozen=True)
class QuadAnnotation:
    kind: QuadKind
    index: int = 0  # axis for Trans, corner for Cis

    def __post_init__(self):
        limit = {QuadKind.EMPTY: 1, QuadKind.TRANS: 2, QuadKind.CIS: 4}[self.kind]
        if not 0 <= self.index < limit:
            raise ValidationError(f"bad index {self.index} for {self.kind.name}")

    @property
    def crossed(self) -> tuple[int, ...]:
        if self.kind is QuadKind.TRANS:
            return (self.index, self.index + 2)
        if self.kind is QuadKind.CIS:
            return (self.index, (self.index + 1) % 4)
        return ()

    @classmethod
    def from_crossed(cls, i: int, j: int) -> "QuadAnnotation":
        i, j = sorted((i, j))
        if j - i == 2:
            return cls(QuadKind.TRANS, i)
        if j - i == 1:
            return cls(QuadKind.CIS, i)
        if (i, j) == (0, 3):
            return cls(QuadKind.CIS, 3)
        raise ValidationError(f"positions {i}, {j} are not a crossing pair")

    def to_json(self):
        return 0 if self.kind is QuadKind.EMPTY else [int(self.kind), self.index]

    @classmethod
    def from_json(cls, value) -> "QuadAnnotation":
        if value == 0:
            return cls(QuadKind.EMPTY)
        try:
            kind, idx = value
            return cls(QuadKind(kind), int(idx))
        except (TypeError, ValueError):
            raise ValidationError(f"bad face annotation {value!r}") from None


EMPTY = QuadAnnotation(QuadKind.EMPTY)


def _frozen(value):
    return value if isinstance(value, int) else tuple(value)


@dataclass(frozen=True)
class DecoratedQuadrangulation:
    """Quadrangulation of a 2p-gon with one annotation per internal face.

    ``annotations[i]`` belongs to the i-th internal face in face-id order
    (the boundary face skipped).
    """

    map: BoundaryMap
    annotations: tuple

    def __post_init__(self):
        m = self.map.map
        if len(self.annotations) != m.n_faces - 1:
            raise ValidationError(f"{len(self.annotations)} annotations for {m.n_faces - 1} internal faces")
        deg = m.face_degrees
        for f in self.internal_faces():
            if deg[f] != 4:
                raise ValidationError("internal face is not a quad", int(f))

    @classmethod
    def from_map(cls, m: PlanarMap) -> "DecoratedQuadrangulation":
        raw = m.face_annotations
        if raw is None:
            raw = (0,) * (m.n_faces - 1)
        return cls(BoundaryMap.from_map(m), tuple(QuadAnnotation.from_json(a) for a in raw))

    def to_map(self) -> PlanarMap:
        m = self.map.map
        ann = tuple(_frozen(a.to_json()) for a in self.annotations)
        return PlanarMap(m.sigma, m.root, m.marked_vertex, ann)

    def internal_faces(self) -> np.ndarray:
        ids = np.arange(self.map.map.n_faces)
        return ids[ids != self.map.boundary_face]

    def annotation_of(self) -> dict:
        return dict(zip(self.internal_faces().tolist(), self.annotations))


@dataclass(frozen=True)
class LoopTrace:
    loops: list  # each loop: list of face ids in traversal order
    N0: int
    N1: int
    N2: int

    @property
    def L(self) -> int:
        return len(self.loops)

    def counts(self) -> dict:
        return {"N0": self.N0, "N1": self.N1, "N2": self.N2, "L": self.L}


def _crossing_partner(dq: DecoratedQuadrangulation):
    """partner[h] = the other crossed half-edge of h's face, -1 if h is not crossed."""
    m = dq.map.map
    partner = np.full(m.half_edge_count, -1, dtype=np.int64)
    faces = m.faces()
    for f, ann in dq.annotation_of().items():
        if ann.kind is QuadKind.EMPTY:
            continue
        cyc = faces[f]
        i, j = ann.crossed
        partner[cyc[i]] = cyc[j]
        partner[cyc[j]] = cyc[i]
    return partner, faces


def trace_loops(dq: DecoratedQuadrangulation) -> LoopTrace:
    m = dq.map.map
    partner, _ = _crossing_partner(dq)
    crossed = np.flatnonzero(partner >= 0)
    boundary = dq.map.boundary_face
    for h in crossed:
        if m.face_of[h ^ 1] == boundary:
            raise OpenStrand(f"loop crosses half-edge {h} onto the boundary face")
        if partner[h ^ 1] < 0:
            raise InconsistentCrossing(f"edge of half-edge {h} is crossed on one side only")
    seen = np.zeros(m.half_edge_count, dtype=bool)
    loops = []
    for start in crossed:
        if seen[start]:
            continue
        loop = []
        h = int(start)
        while not seen[h]:
            seen[h] = True
            out = int(partner[h])
            seen[out] = True
            loop.append(int(m.face_of[h]))
            h = out ^ 1
        loops.append(loop)
    kinds = Counter(a.kind for a in dq.annotations)
    return LoopTrace(loops, kinds[QuadKind.EMPTY], kinds[QuadKind.TRANS], kinds[QuadKind.CIS])


@dataclass(frozen=True)
class OnWeight:
    log_weight: float
    exponents: dict  # {"n": L, "h0": N0, "h1": N1, "h2": N2}
    exact: Fraction | None

    @property
    def value(self) -> float:
        return math.exp(self.log_weight)


def _is_rational(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def weight_O_n(dq: DecoratedQuadrangulation, n, h0, h1, h2) -> OnWeight:
    """n**L h0**N0 h1**N1 h2**N2, in log space (and exactly for rational inputs)."""
    t = trace_loops(dq)
    exps = {"n": t.L, "h0": t.N0, "h1": t.N1, "h2": t.N2}
    bases = {"n": n, "h0": h0, "h1": h1, "h2": h2}
    log_w = 0.0
    for key, e in exps.items():
        if e == 0:
            continue
        b = float(bases[key])
        if b < 0:
            raise ValidationError(f"{key} must be nonnegative")
        log_w += -math.inf if b == 0 else e * math.log(b)
    exact = None
    if all(_is_rational(v) for v in bases.values()):
        exact = Fraction(1)
        for key, e in exps.items():
            exact *= Fraction(bases[key]) ** e
    return OnWeight(log_w, exps, exact)


@dataclass(frozen=True, eq=False)
class GasketResult:
    gasket: BoundaryMap
    face_degree_multiset: Counter  # internal faces of the gasket
    w_q_factors: Counter  # {k: multiplicity} over internal faces of degree 2k
    removed_area: int
    vertex_map: np.ndarray  # ambient vertex of each gasket vertex


def _outer_domain(dq: DecoratedQuadrangulation):
    """Loops avoid vertices, so two vertices lie in the same complementary
    domain exactly when uncrossed edges connect them.  Returns the kept
    internal faces (empty quads of the boundary's domain) and kept edges
    (uncrossed edges of that domain)."""
    m = dq.map.map
    partner, faces = _crossing_partner(dq)
    uncrossed = (partner[0::2] < 0) & (partner[1::2] < 0)
    tails = m.vertex_of[0::2][uncrossed]
    heads = m.vertex_of[1::2][uncrossed]
    adj = csr_matrix((np.ones(tails.size), (tails, heads)), shape=(m.n_vertices,) * 2)
    _, comp = connected_components(adj, directed=False)
    outer = comp == comp[m.root_vertex]
    keep_edge = uncrossed & outer[m.vertex_of[0::2]]
    ann = dq.annotation_of()
    kept = np.zeros(m.n_faces, dtype=bool)
    for f, cyc in enumerate(faces):
        if f != dq.map.boundary_face and ann[f].kind is QuadKind.EMPTY:
            kept[f] = bool(outer[m.vertex_of[cyc[0]]])
    return kept, keep_edge


def _restrict(m: PlanarMap, keep_edge: np.ndarray) -> tuple[PlanarMap, np.ndarray]:
    """Delete the edges not in keep_edge; half-edges keep their relative order."""
    keep_h = np.repeat(keep_edge, 2)
    new_id = np.full(m.half_edge_count, -1, dtype=np.int64)
    kept_edges = np.flatnonzero(keep_edge)
    for rank, e in enumerate(kept_edges):
        new_id[2 * e] = 2 * rank
        new_id[2 * e + 1] = 2 * rank + 1
    sigma = np.empty(2 * kept_edges.size, dtype=np.int64)
    for h in np.flatnonzero(keep_h):
        g = m.sigma[h]
        while not keep_h[g]:
            g = m.sigma[g]
        sigma[new_id[h]] = new_id[g]
    return PlanarMap(sigma, int(new_id[m.root])), kept_edges


def extract_gasket(dq: DecoratedQuadrangulation) -> GasketResult:
    """Erase every quad a loop passes through and everything enclosed by an
    outermost loop.  Edges outside all loops survive even when both
    neighbouring quads are erased (two loops running side by side)."""
    trace_loops(dq)  # validates the decoration
    m = dq.map.map
    kept, keep_edge = _outer_domain(dq)
    g, kept_edges = _restrict(m, keep_edge)
    vertex_map = np.empty(g.n_vertices, dtype=np.int64)
    old = np.stack([2 * kept_edges, 2 * kept_edges + 1], 1).ravel()
    vertex_map[g.vertex_of] = m.vertex_of[old]
    gb = BoundaryMap.from_map(g)
    if gb.p != dq.map.p:
        raise ValidationError("boundary length changed during extraction")
    deg = g.face_degrees
    internal = [int(d) for f, d in enumerate(deg) if f != gb.boundary_face]
    removed = int(m.n_faces - 1 - kept.sum())
    return GasketResult(
        gasket=gb,
        face_degree_multiset=Counter(internal),
        w_q_factors=Counter(d // 2 for d in internal),
        removed_area=removed,
        vertex_map=vertex_map,
    )


@dataclass(frozen=True)
class WqWeight:
    log_weight: float
    factors: Counter

    @property
    def value(self) -> float:
        return math.exp(self.log_weight)


def weight_W_q(target, weights) -> WqWeight:
    """Product of q_{deg/2} over the internal faces of a gasket or boundary map."""
    if isinstance(target, GasketResult):
        bm = target.gasket
    elif isinstance(target, BoundaryMap):
        bm = target
    else:
        bm = BoundaryMap.from_map(target)
    deg = bm.map.face_degrees
    factors: Counter = Counter()
    for f, d in enumerate(deg):
        if f == bm.boundary_face:
            continue
        if d % 2:
            raise OddDegree(f"face {f} has odd degree {d}")
        factors[int(d) // 2] += 1
    log_w = 0.0
    for k, mult in factors.items():
        log_w += mult * weights.log_q(k)
    return WqWeight(log_w, factors)
