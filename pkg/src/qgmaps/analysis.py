"""Dimension estimates from sampled maps.

Two estimators: the slope of log(mean distance) against log(E) across size
windows, and the slope of log(ball volume) against log(radius) inside a
window of radii.  Standard errors come from a seeded bootstrap.
"""
from __future__ import annotations

import enum
import json
import math
from collections import defaultdict
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateFit, InsufficientData, InsufficientPairs, ValidationError, WindowEmpty
from .exponents import rival_predictions
from .maps import BallProfile, bfs_distances

BOOTSTRAP_RESAMPLES = 1000
BOOTSTRAP_SEED = 20240501
BALL_WINDOW = (0.1, 0.5)
MIN_WINDOWS = 3
MIN_PER_WINDOW = 20


class Method(enum.Enum):
    FINITE_SIZE_SLOPE = "FiniteSizeSlope"
    BALL_GROWTH = "BallGrowth"


@dataclass(frozen=True)
class ScalingSample:
    edges: int
    mean_distance: float
    max_distance: int
    seed: int
    window: int = 0
    vertices: int = 0

    def __post_init__(self):
        bound = self.vertices if self.vertices else math.inf
        if not 0 < self.mean_distance <= self.max_distance <= bound:
            raise ValidationError(
                f"need 0 < mean ({self.mean_distance}) <= max ({self.max_distance}) <= V ({bound})")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "ScalingSample":
        return cls(int(d["edges"]), float(d["mean_distance"]), int(d["max_distance"]),
                   int(d["seed"]), int(d.get("window", 0)), int(d.get("vertices", 0)))


def profile_to_json(p: BallProfile) -> str:
    doc = {"map_size": int(p.map_size), "radii": [int(r) for r in p.radii],
           "volumes": [int(v) for v in p.volumes]}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def profile_from_dict(d: dict) -> BallProfile:
    return BallProfile(np.asarray(d["radii"], dtype=np.int64), np.asarray(d["volumes"], dtype=np.int64),
                       int(d.get("source", -1)), int(d.get("map_size", 0)))


@dataclass(frozen=True)
class DimensionEstimate:
    d_hat: float
    stderr: float
    window: tuple
    method: Method

    def row(self) -> dict:
        return {"method": self.method.value, "window": f"{self.window[0]}:{self.window[1]}",
                "d_hat": self.d_hat, "stderr": self.stderr}


def _slopes(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """OLS slopes along the last axis."""
    xm = x - x.mean(axis=-1, keepdims=True)
    ym = y - y.mean(axis=-1, keepdims=True)
    return (xm * ym).sum(axis=-1) / (xm * xm).sum(axis=-1)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def estimate_dimension_fss(samples, *, resamples: int = BOOTSTRAP_RESAMPLES,
                           seed: int = BOOTSTRAP_SEED, min_windows: int = MIN_WINDOWS,
                           min_per_window: int = MIN_PER_WINDOW) -> DimensionEstimate:
    """d_hat = 1/s with s the least-squares slope of log(mean_distance) on
    log(E) over all samples; the bootstrap resamples within each window."""
    groups: dict = defaultdict(list)
    for s in samples:
        groups[s.window].append(s)
    if len(groups) < min_windows:
        raise InsufficientData(f"{len(groups)} size windows, need {min_windows}")
    small = [w for w, g in groups.items() if len(g) < min_per_window]
    if small:
        raise InsufficientData(f"windows {small} have fewer than {min_per_window} samples")
    keys = sorted(groups)
    x = np.concatenate([[math.log(s.edges) for s in groups[w]] for w in keys])
    y = np.concatenate([[math.log(s.mean_distance) for s in groups[w]] for w in keys])
    if np.ptp(x) == 0:
        raise DegenerateFit("all samples have the same size")
    slope = float(_slopes(x, y))
    if slope <= 0:
        raise DegenerateFit(f"distance does not grow with size (slope {slope})")
    rng = _rng(seed)
    idx, start = [], 0
    for w in keys:
        n = len(groups[w])
        idx.append(start + rng.integers(n, size=(resamples, n)))
        start += n
    idx = np.concatenate(idx, axis=1)
    boot = 1.0 / _slopes(x[idx], y[idx])
    sizes = [s.edges for s in samples]
    return DimensionEstimate(1.0 / slope, float(np.std(boot, ddof=1)) if resamples > 1 else 0.0,
                             (min(sizes), max(sizes)), Method.FINITE_SIZE_SLOPE)


def _ball_points(profile: BallProfile, lo: float, hi: float):
    r = np.asarray(profile.radii, dtype=float)
    v = np.asarray(profile.volumes, dtype=float)
    rmax = r.max() if r.size else 0.0
    sel = (r >= lo * rmax) & (r <= hi * rmax) & (r > 0)
    return np.log(r[sel]), np.log(v[sel])


def estimate_dimension_ball(profiles, fit_window=BALL_WINDOW, *, resamples: int = BOOTSTRAP_RESAMPLES,
                            seed: int = BOOTSTRAP_SEED) -> DimensionEstimate:
    """Pooled log-log slope of ball volume against radius, using the radii
    between fit_window[0] and fit_window[1] times each profile's largest
    radius; the bootstrap resamples whole profiles."""
    lo, hi = fit_window
    if not 0 < lo < hi < 1:
        raise ValidationError(f"fit window {fit_window} must satisfy 0 < lo < hi < 1")
    profiles = list(profiles)
    if not profiles:
        raise InsufficientData("no ball profiles")
    pts = [_ball_points(p, lo, hi) for p in profiles]
    pts = [(x, y) for x, y in pts if x.size]
    if not pts:
        raise WindowEmpty(f"no radius falls inside {fit_window}")
    x = np.concatenate([p[0] for p in pts])
    y = np.concatenate([p[1] for p in pts])
    if np.ptp(x) == 0:
        raise WindowEmpty(f"a single radius falls inside {fit_window}; widen the window")
    d_hat = float(_slopes(x, y))
    # per-profile sufficient statistics make the bootstrap cheap
    stats = np.array([[xs.size, xs.sum(), ys.sum(), (xs * xs).sum(), (xs * ys).sum()] for xs, ys in pts])
    stderr = 0.0
    if resamples > 1 and len(pts) > 1:
        rng = _rng(seed)
        idx = rng.integers(len(pts), size=(resamples, len(pts)))
        n, sx, sy, sxx, sxy = (stats[idx, j].sum(axis=1) for j in range(5))
        den = n * sxx - sx * sx
        ok = den > 0
        boot = (n * sxy - sx * sy)[ok] / den[ok]
        stderr = float(np.std(boot, ddof=1))
    return DimensionEstimate(d_hat, stderr, (lo, hi), Method.BALL_GROWTH)


@dataclass(frozen=True)
class ComparisonRow:
    c: float
    d1: float
    d2: float
    d_h: float
    measured: float | None = None


def comparison_table(c_grid, measured: dict | None = None, phase: str | None = None) -> list[ComparisonRow]:
    """Rows (c, D1, D2, 4, measured) for each central charge; ``measured``
    maps (phase, c) to an estimate."""
    rows = []
    for c in c_grid:
        r = rival_predictions(float(c))
        m = None if measured is None else measured.get((phase, float(c)))
        rows.append(ComparisonRow(float(c), r.d1, r.d2, r.d_claimed, m))
    return rows


@dataclass(frozen=True)
class ProbeEstimate:
    slope: float
    stderr: float
    n_pairs: int
    n_samples: int


def geodesic_pairs(dq, gasket=None, source: int | None = None):
    """(ambient distance, gasket distance) from one gasket vertex to every
    other gasket vertex; ``gasket`` is an extract_gasket result for dq."""
    from .gasket import extract_gasket

    g = extract_gasket(dq) if gasket is None else gasket
    gm = g.gasket.map
    src = gm.root_vertex if source is None else source
    d_gas = bfs_distances(gm, src)
    d_amb = bfs_distances(dq.map.map, int(g.vertex_map[src]))[g.vertex_map]
    sel = d_amb > 0
    return d_amb[sel], d_gas[sel]


def dense_geodesic_probe(samples, *, resamples: int = BOOTSTRAP_RESAMPLES,
                         seed: int = BOOTSTRAP_SEED) -> ProbeEstimate:
    """Slope of log(gasket distance) on log(ambient distance) between
    gasket vertices; the bootstrap resamples whole maps."""
    per = [geodesic_pairs(dq) for dq in samples]
    per = [(np.log(a), np.log(b)) for a, b in per if a.size]
    if not per:
        raise InsufficientPairs("no pairs of distinct gasket vertices")
    x = np.concatenate([p[0] for p in per])
    y = np.concatenate([p[1] for p in per])
    if x.size < 2 or np.ptp(x) == 0:
        raise InsufficientPairs("need pairs at two different ambient distances")
    slope = float(_slopes(x, y))
    stats = np.array([[a.size, a.sum(), b.sum(), (a * a).sum(), (a * b).sum()] for a, b in per])
    stderr = 0.0
    if resamples > 1 and len(per) > 1:
        idx = _rng(seed).integers(len(per), size=(resamples, len(per)))
        n, sx, sy, sxx, sxy = (stats[idx, j].sum(axis=1) for j in range(5))
        den = n * sxx - sx * sx
        ok = den > 0
        stderr = float(np.std((n * sxy - sx * sy)[ok] / den[ok], ddof=1))
    return ProbeEstimate(slope, stderr, int(x.size), len(per))
