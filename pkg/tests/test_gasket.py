import math
from collections import Counter
from fractions import Fraction
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgmaps.errors import InconsistentCrossing, OddDegree, OpenStrand, ValidationError
from qgmaps.fixtures import GOLDEN_FILE, build_golden, build_single_loop, decorate, load_golden
from qgmaps.gasket import (
    EMPTY,
    DecoratedQuadrangulation,
    QuadAnnotation,
    QuadKind,
    extract_gasket,
    trace_loops,
    weight_O_n,
    weight_W_q,
)
from qgmaps.maps import PlanarMap, build_from_face_lists, serialize
from qgmaps.sampler import LoopParams, SampleSpec, sample_decorated_quadrangulation
from qgmaps.weights import BaseSequence, build_weight_sequence


def grid_lists(n):
    v = lambda i, j: i * (n + 1) + j  # noqa: E731
    quads = [[v(i, j), v(i, j + 1), v(i + 1, j + 1), v(i + 1, j)] for i in range(n) for j in range(n)]
    rim = [v(0, j) for j in range(n)] + [v(i, n) for i in range(n)]
    rim += [v(n, j) for j in range(n, 0, -1)] + [v(i, 0) for i in range(n, 0, -1)]
    return [rim[::-1]] + quads, v


def test_golden_file_matches_construction():
    text = (resources.files("qgmaps") / "data" / GOLDEN_FILE).read_text()
    assert serialize(build_golden().to_map()) == text
    assert load_golden().map.map.rooted_code() == build_golden().map.map.rooted_code()


def test_golden_counts():
    dq = load_golden()
    m = dq.map.map
    assert (m.n_vertices, m.n_edges, m.n_faces, dq.map.p) == (33, 60, 29, 4)
    t = trace_loops(dq)
    assert t.counts() == {"N0": 9, "N1": 8, "N2": 11, "L": 3}
    assert sorted(len(loop) for loop in t.loops) == [5, 6, 8]


def test_golden_loop_weight_exact():
    n, h0, h1, h2 = Fraction(3, 2), Fraction(1, 5), Fraction(2, 7), Fraction(1, 3)
    w = weight_O_n(load_golden(), n, h0, h1, h2)
    assert w.exponents == {"n": 3, "h0": 9, "h1": 8, "h2": 11}
    assert w.exact == n**3 * h0**9 * h1**8 * h2**11
    assert w.log_weight == pytest.approx(math.log(w.exact), rel=1e-13)


def test_golden_gasket():
    g = extract_gasket(load_golden())
    assert g.face_degree_multiset == Counter({4: 5, 6: 1, 10: 1})
    assert g.w_q_factors == Counter({2: 5, 3: 1, 5: 1})
    assert g.removed_area == 23
    gm = g.gasket.map
    assert (gm.n_vertices, gm.n_edges, g.gasket.p) == (16, 22, 4)
    weights = build_weight_sequence(BaseSequence.pure_power(2.25))
    w = weight_W_q(g, weights)
    expected = 5 * weights.log_q(2) + weights.log_q(3) + weights.log_q(5)
    assert w.factors == Counter({2: 5, 3: 1, 5: 1})
    assert w.log_weight == pytest.approx(expected, rel=1e-14)


def test_single_loop():
    dq = build_single_loop()
    t = trace_loops(dq)
    assert t.L == 1 and len(t.loops[0]) == 4 and t.N2 == 4
    g = extract_gasket(dq)
    assert g.face_degree_multiset == Counter({4: 4, 8: 1})
    assert g.removed_area == 4
    # brute force: the gasket keeps every edge except the four spokes at z
    assert g.gasket.map.n_edges == dq.map.map.n_edges - 4
    assert g.gasket.map.n_vertices == dq.map.map.n_vertices - 1


def test_undecorated_map_is_its_own_gasket():
    faces, _ = grid_lists(3)
    dq = decorate(faces, {}, (faces[0][0], faces[0][1]))
    t = trace_loops(dq)
    assert t.L == 0 and t.N0 == 9
    g = extract_gasket(dq)
    assert g.removed_area == 0
    assert g.gasket.map.rooted_code() == dq.map.map.rooted_code()
    assert np.array_equal(np.sort(g.vertex_map), np.arange(dq.map.map.n_vertices))
    assert weight_O_n(dq, 0, 1, 1, 1).exact == 1


def test_zero_loop_weight_kills_loops():
    w = weight_O_n(load_golden(), 0, 1, 1, 1)
    assert w.exact == 0 and w.log_weight == -math.inf


def test_quad_weight_single_face():
    m = build_from_face_lists([[0, 1, 2, 3], [3, 2, 1, 0]])
    quads = build_weight_sequence(BaseSequence.custom([0.0, 1.0]))
    # one internal quad, q_2 = 1/12 for critical quadrangulations
    assert weight_W_q(m, quads).value == pytest.approx(1 / 12, rel=1e-12)


def test_open_strand():
    faces = [[3, 2, 1, 0], [0, 1, 2, 3]]
    m = build_from_face_lists(faces, root=(0, 3))
    dq = DecoratedQuadrangulation.from_map(PlanarMap(m.sigma, m.root, None, ((1, 0),)))
    with pytest.raises(OpenStrand):
        trace_loops(dq)


def test_inconsistent_crossing():
    faces, v = grid_lists(3)
    centre = faces.index([v(1, 1), v(1, 2), v(2, 2), v(2, 1)])
    dq = decorate(faces, {centre: [(v(1, 1), v(1, 2)), (v(2, 2), v(2, 1))]}, (faces[0][0], faces[0][1]))
    with pytest.raises(InconsistentCrossing):
        trace_loops(dq)


def test_odd_degree():
    triangle = build_from_face_lists([[3, 2, 1, 0], [0, 1, 2], [0, 2, 3]], root=(3, 2))
    with pytest.raises(OddDegree):
        weight_W_q(triangle, build_weight_sequence(BaseSequence.custom([0.0, 1.0])))


def test_annotation_codec():
    assert QuadAnnotation.from_crossed(1, 3) == QuadAnnotation(QuadKind.TRANS, 1)
    assert QuadAnnotation.from_crossed(3, 0) == QuadAnnotation(QuadKind.CIS, 3)
    assert QuadAnnotation.from_crossed(2, 1).crossed == (1, 2)
    for a in (EMPTY, QuadAnnotation(QuadKind.TRANS, 0), QuadAnnotation(QuadKind.CIS, 2)):
        assert QuadAnnotation.from_json(a.to_json()) == a
    with pytest.raises(ValidationError):
        QuadAnnotation(QuadKind.TRANS, 2)
    with pytest.raises(ValidationError):
        QuadAnnotation.from_json("cis")


HEAVY = build_weight_sequence(BaseSequence.pure_power(2.25))


@given(st.integers(0, 2**32), st.integers(1, 3))
@settings(max_examples=25, deadline=None)
def test_counting_identities_on_samples(seed, p):
    params = LoopParams(1.0, 1.0, 0.5, 0.25, max_depth=2)
    s = sample_decorated_quadrangulation(params, SampleSpec(HEAVY, (p, 60), seed=seed), boundary=p)
    dq = s.decorated
    m = dq.map.map
    t = trace_loops(dq)
    assert t.N0 + t.N1 + t.N2 == m.n_faces - 1
    assert sum(len(loop) for loop in t.loops) == t.N1 + t.N2
    assert t.L >= s.holes
    g = extract_gasket(dq)
    assert g.gasket.p == dq.map.p == p
    gm = g.gasket.map
    assert gm.n_vertices - gm.n_edges + gm.n_faces == 2
    assert sum(k * mult for k, mult in g.w_q_factors.items()) + p == gm.n_edges
    assert g.removed_area == m.n_faces - 1 - g.face_degree_multiset[4]
    assert g.gasket.map.rooted_code() == PlanarMap(s.gasket.map.sigma, s.gasket.map.root).rooted_code()

