import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgmaps.analysis import (
    DimensionEstimate,
    Method,
    ScalingSample,
    comparison_table,
    dense_geodesic_probe,
    estimate_dimension_ball,
    estimate_dimension_fss,
    geodesic_pairs,
)
from qgmaps.errors import (
    DegenerateFit,
    InsufficientData,
    InsufficientPairs,
    OutOfRange,
    ValidationError,
    WindowEmpty,
)
from qgmaps.fixtures import build_golden, build_single_loop
from qgmaps.maps import BallProfile, ball_profile, build_from_face_lists
from qgmaps.sampler import LoopParams, SampleSpec, sample_decorated_quadrangulation
from qgmaps.weights import BaseSequence, build_weight_sequence


def synthetic(exponent, sizes=(1000, 4000, 16000, 64000), per=25, noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for w, E in enumerate(sizes):
        for i in range(per):
            e = int(E * (1 + 0.1 * i / per))
            d = e ** (1 / exponent) * (np.exp(noise * rng.standard_normal()) if noise else 1.0)
            out.append(ScalingSample(e, float(d), int(np.ceil(2 * d)), i, w))
    return out


@pytest.mark.parametrize("d", [4.0, 3.0, 3.5, 2.5])
def test_fss_exact_power_law(d):
    est = estimate_dimension_fss(synthetic(d))
    assert est.d_hat == pytest.approx(d, abs=1e-10)
    assert est.stderr < 1e-10
    assert est.method is Method.FINITE_SIZE_SLOPE


def test_fss_bootstrap_deterministic_and_sensible():
    samples = synthetic(4.0, noise=0.05, seed=3)
    a, b = estimate_dimension_fss(samples), estimate_dimension_fss(samples)
    assert a == b
    assert 0 < a.stderr < 0.5 and abs(a.d_hat - 4.0) < 4 * a.stderr + 0.05
    assert estimate_dimension_fss(samples, seed=1).stderr != a.stderr


def test_fss_errors():
    with pytest.raises(InsufficientData):
        estimate_dimension_fss(synthetic(4.0, sizes=(100, 200)))
    with pytest.raises(InsufficientData):
        estimate_dimension_fss(synthetic(4.0, per=5))
    flat = [ScalingSample(500, 3.0, 5, i, w) for w in range(3) for i in range(20)]
    with pytest.raises(DegenerateFit):
        estimate_dimension_fss(flat)


def test_scaling_sample_invariants():
    with pytest.raises(ValidationError):
        ScalingSample(10, 0.0, 1, 0)
    with pytest.raises(ValidationError):
        ScalingSample(10, 3.0, 2, 0)
    with pytest.raises(ValidationError):
        ScalingSample(10, 3.0, 9, 0, vertices=5)
    s = ScalingSample(10, 2.5, 4, 7, 1, 9)
    assert ScalingSample.from_dict(__import__("json").loads(s.to_json())) == s


def power_profile(d, rmax=60):
    r = np.arange(rmax + 1)
    return BallProfile(r, np.maximum(r, 1) ** d, 0, 0)


def test_ball_exact_power_law():
    est = estimate_dimension_ball([power_profile(4.0)] * 3)
    assert est.d_hat == pytest.approx(4.0, abs=1e-10)
    assert est.stderr < 1e-10 and est.window == (0.1, 0.5)


def test_ball_grid_dimension_two():
    n = 60
    v = lambda i, j: i * (n + 1) + j  # noqa: E731
    faces = [[v(i, j), v(i, j + 1), v(i + 1, j + 1), v(i + 1, j)] for i in range(n) for j in range(n)]
    rim = [v(0, j) for j in range(n)] + [v(i, n) for i in range(n)]
    rim += [v(n, j) for j in range(n, 0, -1)] + [v(i, 0) for i in range(n, 0, -1)]
    m, index = build_from_face_lists(faces + [rim[::-1]], return_index=True)
    centre = int(m.vertex_of[index[(v(30, 30), v(30, 31))]])
    est = estimate_dimension_ball([ball_profile(m, centre)], (0.1, 0.5))
    assert est.d_hat == pytest.approx(2.0, abs=0.1)


def test_ball_errors():
    with pytest.raises(InsufficientData):
        estimate_dimension_ball([])
    with pytest.raises(WindowEmpty):
        estimate_dimension_ball([power_profile(4.0, rmax=1)], (0.6, 0.9))
    with pytest.raises(ValidationError):
        estimate_dimension_ball([power_profile(4.0)], (0.5, 0.2))


@given(st.floats(1.5, 6.0), st.integers(20, 200))
@settings(max_examples=30, deadline=None)
def test_ball_recovers_planted_exponent(d, rmax):
    est = estimate_dimension_ball([power_profile(d, rmax)], (0.1, 0.5))
    assert est.d_hat == pytest.approx(d, abs=1e-10)


def test_comparison_table():
    rows = comparison_table([0.0, -2.0])
    assert (rows[0].d1, rows[0].d2, rows[0].d_h) == (pytest.approx(4, abs=1e-12), pytest.approx(4, abs=1e-12), 4)
    assert rows[1].d1 == pytest.approx(2.0, abs=1e-12)
    assert rows[1].d2 == pytest.approx(3.5616, abs=1e-4)
    assert comparison_table([]) == []
    joined = comparison_table([0.0], {("dilute", 0.0): 3.9}, "dilute")
    assert joined[0].measured == 3.9
    with pytest.raises(OutOfRange):
        comparison_table([1.5])


def test_estimate_row():
    row = DimensionEstimate(4.0, 0.1, (0.1, 0.5), Method.BALL_GROWTH).row()
    assert row == {"method": "BallGrowth", "window": "0.1:0.5", "d_hat": 4.0, "stderr": 0.1}


def test_geodesic_probe_trivial_decoration():
    # no loops: gasket and ambient metrics coincide
    n = 8
    v = lambda i, j: i * (n + 1) + j  # noqa: E731
    faces = [[v(i, j), v(i, j + 1), v(i + 1, j + 1), v(i + 1, j)] for i in range(n) for j in range(n)]
    rim = [v(0, j) for j in range(n)] + [v(i, n) for i in range(n)]
    rim += [v(n, j) for j in range(n, 0, -1)] + [v(i, 0) for i in range(n, 0, -1)]
    from qgmaps.fixtures import decorate

    dq = decorate([rim[::-1]] + faces, {}, (rim[::-1][0], rim[::-1][1]))
    est = dense_geodesic_probe([dq])
    assert est.slope == pytest.approx(1.0, abs=1e-12)


def test_geodesic_pairs_dominate():
    for dq in (build_golden(), build_single_loop()):
        amb, gas = geodesic_pairs(dq)
        assert np.all(gas >= amb) and amb.size > 0


def test_geodesic_probe_on_samples():
    weights = build_weight_sequence(BaseSequence.pure_power(2.25))
    params = LoopParams(1.0, 1.0, 0.4, 0.1, max_depth=1)
    samples = [sample_decorated_quadrangulation(params, SampleSpec(weights, (30, 200), seed=s)).decorated
               for s in range(6)]
    est = dense_geodesic_probe(samples)
    assert est.slope >= 0.5 and est.n_samples == 6 and est.stderr >= 0
    with pytest.raises(InsufficientPairs):
        dense_geodesic_probe([])
