"""Critical heavy-tailed face weights ``q_k = c0 * beta**k * q0_k``.

The constants are tuned through the auxiliary series

    f0(z) = sum_{k>=1} binom(2k-1, k) q0_k (z/4)**(k-1),

with ``c0 = 4 / f0'(1)`` and ``1/(4 beta) = 1 + f0(1)/f0'(1)``.  For power-law
bases the series converge slowly at ``z = 1``; the tail beyond the summation
cut is evaluated from the large-k expansion of the central binomial
coefficient with Hurwitz zeta sums, and the truncation error of that expansion
is returned as a certified remainder.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import special

from .errors import DegenerateSeries, OutOfRange, SlowConvergence

TAIL_TARGET = 1e-10
DEFAULT_K_MAX = 10**6
EXACT_BINOMIAL_LIMIT = 30

# Gamma(k+1/2)/Gamma(k+1) = k**-0.5 * sum_j _GAMMA_RATIO[j] k**-j  (asymptotic)
_GAMMA_RATIO = (1.0, -1 / 8, 1 / 128, 5 / 1024, -21 / 32768, -399 / 262144)
# |remainder after the six terms above| <= 2 * 869/4194304 * k**-6 for k >= 30
_GAMMA_REMAINDER = 2 * 869 / 4194304
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def binomial_ratio(k: np.ndarray | int) -> np.ndarray:
    """``binom(2k-1, k) / 4**(k-1)`` for ``k >= 1``.

    Exact rational arithmetic up to k = 30, Pochhammer ratios beyond (the
    integer binomial leaves the int64 range near k = 33).
    """
    k = np.atleast_1d(np.asarray(k, dtype=np.int64))
    out = np.empty(k.shape, dtype=float)
    small = k <= EXACT_BINOMIAL_LIMIT
    out[small] = [_exact_ratio(int(v)) for v in k[small]]
    big = k[~small].astype(float)
    out[~small] = _TWO_OVER_SQRT_PI * special.poch(big + 1.0, -0.5)
    return out


@functools.lru_cache(maxsize=None)
def _exact_ratio(k: int) -> float:
    return float(Fraction(math.comb(2 * k - 1, k), 4 ** (k - 1)))


@dataclass(frozen=True)
class BaseSequence:
    """Heavy-tailed base sequence ``q0_k``.

    kind is one of ``"pure_power"`` (k**-a), ``"power_with_cutoff"``
    (k**-a up to ``cutoff``) or ``"custom"`` (explicit finite list, index 0
    holding q0_1).
    """

    kind: str
    a: float | None = None
    cutoff: int | None = None
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind in ("pure_power", "power_with_cutoff"):
            if self.a is None or not (1.5 < self.a < 2.5):
                raise OutOfRange(f"power-law base needs a in (3/2, 5/2), got {self.a}")
            if self.kind == "power_with_cutoff" and (self.cutoff is None or self.cutoff < 1):
                raise OutOfRange("power_with_cutoff needs a cutoff >= 1")
        elif self.kind == "custom":
            if any(v < 0 or math.isnan(v) for v in self.values):
                raise OutOfRange("custom base terms must be nonnegative")
            if not any(v > 0 for v in self.values):
                raise OutOfRange("custom base must have a positive term")
        else:
            raise OutOfRange(f"unknown base kind {self.kind!r}")

    @classmethod
    def pure_power(cls, a: float) -> "BaseSequence":
        return cls("pure_power", a=float(a))

    @classmethod
    def power_with_cutoff(cls, a: float, cutoff: int) -> "BaseSequence":
        return cls("power_with_cutoff", a=float(a), cutoff=int(cutoff))

    @classmethod
    def custom(cls, values, a: float | None = None) -> "BaseSequence":
        return cls("custom", a=a, values=tuple(float(v) for v in values))

    @property
    def support_max(self) -> int | None:
        """Largest k with a nonzero term, None for unbounded support."""
        if self.kind == "pure_power":
            return None
        if self.kind == "power_with_cutoff":
            return self.cutoff
        nz = [i for i, v in enumerate(self.values) if v > 0]
        return nz[-1] + 1

    def terms(self, k) -> np.ndarray:
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        if self.kind == "custom":
            vals = np.asarray(self.values, dtype=float)
            out = np.zeros(k.shape)
            inside = (k >= 1) & (k <= len(vals))
            out[inside] = vals[k[inside] - 1]
            return out
        out = np.power(k.astype(float), -self.a)
        if self.kind == "power_with_cutoff":
            out[k > self.cutoff] = 0.0
        return out

    def term(self, k: int) -> float:
        return float(self.terms(k)[0])


@dataclass(frozen=True)
class SeriesValue:
    value: float
    derivative: float
    tail_bound: float
    truncation: int


def _power_tail(a: float, K: int) -> tuple[float, float, float]:
    """Tails sum_{k>K} of r_k k**-a and (k-1) r_k k**-a, with remainder bound."""
    q = K + 1.0
    f_tail = 0.0
    d_tail = 0.0
    for j, cj in enumerate(_GAMMA_RATIO):
        hi = special.zeta(a + 0.5 + j, q)
        f_tail += cj * hi
        d_tail += cj * (special.zeta(a - 0.5 + j, q) - hi)
    J = len(_GAMMA_RATIO)
    rem_f = _GAMMA_REMAINDER * special.zeta(a + 0.5 + J, q)
    rem_d = _GAMMA_REMAINDER * (special.zeta(a - 0.5 + J, q) + special.zeta(a + 0.5 + J, q))
    # zeta evaluations carry ~1e-15 relative error
    rounding = 1e-14 * (abs(d_tail) + abs(f_tail))
    bound = _TWO_OVER_SQRT_PI * (rem_f + rem_d) + rounding
    return _TWO_OVER_SQRT_PI * f_tail, _TWO_OVER_SQRT_PI * d_tail, bound


def _partial(base: BaseSequence, z: float, lo: int, hi: int) -> tuple[float, float]:
    """Sums over lo <= k <= hi of the series and of its z-derivative."""
    if hi < lo:
        return 0.0, 0.0
    k = np.arange(lo, hi + 1, dtype=np.int64)
    t = binomial_ratio(k) * base.terms(k)
    km1 = (k - 1).astype(float)
    if z == 1.0:
        zp = np.ones_like(t)
        zd = km1
    else:
        logz = math.log(z) if z > 0 else -np.inf
        with np.errstate(invalid="ignore"):
            zp = np.where(k == 1, 1.0, np.exp(km1 * logz))
            zd = np.where(k == 2, 1.0, np.where(k > 2, km1 * np.exp((km1 - 1) * logz), 0.0))
    return math.fsum(t * zp), math.fsum(t * zd)


def eval_auxiliary_series(base: BaseSequence, z: float = 1.0, *, tol: float = TAIL_TARGET,
                          k_max: int = DEFAULT_K_MAX) -> SeriesValue:
    """Evaluate f0(z) and f0'(z) with an explicit bound on the neglected tail."""
    z = float(z)
    if not 0.0 <= z <= 1.0:
        raise OutOfRange(f"z={z} outside [0, 1]")
    support = base.support_max
    if base.kind == "custom" or (support is not None and support <= k_max):
        # finite support: exact up to rounding
        f, d = _partial(base, z, 1, support)
        return SeriesValue(f, d, 0.0, support)

    if z == 1.0:
        f, d = _partial(base, 1.0, 1, 32)
        K = 32
        f_tail, d_tail, bound = _power_tail(base.a, K)
        while bound >= tol and K < k_max:
            K_new = min(2 * K, k_max)
            df, dd = _partial(base, 1.0, K + 1, K_new)
            f, d, K = f + df, d + dd, K_new
            f_tail, d_tail, bound = _power_tail(base.a, K)
        if base.kind == "power_with_cutoff":
            # remove the part of the power tail beyond the cutoff
            cf, cd, cb = _power_tail(base.a, base.cutoff)
            f_tail, d_tail, bound = f_tail - cf, d_tail - cd, bound + cb
        if bound >= tol:
            raise SlowConvergence(f"tail bound {bound:.3g} above {tol:.1g} at K={K}", bound)
        return SeriesValue(f + f_tail, d + d_tail, bound, K)

    # 0 <= z < 1: terms are dominated by r_{K+1} q0_{K+1} z**k (both factors decrease)
    f = d = 0.0
    K = 0
    chunk = 1024
    bound = math.inf
    while K < k_max:
        hi = min(K + chunk, k_max)
        df, dd = _partial(base, z, K + 1, hi)
        f, d, K = f + df, d + dd, hi
        if z == 0.0:
            bound = 0.0
            break
        lead = float(binomial_ratio(K + 1)[0]) * base.term(K + 1)
        geo = z**K / (1.0 - z)
        dgeo = K * z ** (K - 1) / (1.0 - z) + z**K / (1.0 - z) ** 2
        bound = lead * (geo + dgeo)
        if bound < tol:
            break
        chunk *= 2
    if bound >= tol:
        raise SlowConvergence(f"tail bound {bound:.3g} above {tol:.1g} at K={K}", bound)
    return SeriesValue(f, d, bound, K)


@dataclass(frozen=True)
class WeightSequence:
    base: BaseSequence
    c_circ: float
    beta: float
    f0_at_1: float
    f0_prime_at_1: float
    truncation: int
    tail_bound: float
    a: float | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def q(self, k: int) -> float:
        """Face weight for half-degree k (memoised)."""
        try:
            return self._cache[k]
        except KeyError:
            pass
        q0 = self.base.term(k)
        val = 0.0 if q0 == 0.0 else math.exp(self.log_q(k))
        self._cache[k] = val
        return val

    def log_q(self, k: int) -> float:
        q0 = self.base.term(k)
        if q0 == 0.0:
            return -math.inf
        return math.log(self.c_circ) + k * math.log(self.beta) + math.log(q0)

    def asymptote(self, k: int) -> float:
        """c0 * beta**k * k**-a, the heavy-tail envelope of q_k."""
        if self.a is None:
            return math.nan
        return math.exp(math.log(self.c_circ) + k * math.log(self.beta) - self.a * math.log(k))

    @property
    def white_offspring_parameter(self) -> float:
        """Success ratio f of the geometric black-child law, P(j) = (1-f) f**j."""
        return 1.0 - 4.0 * self.beta

    def black_offspring_pmf(self, k_max: int) -> np.ndarray:
        """P(black vertex has half-degree k) for k = 1..k_max.

        The law is ``binom(2k-1,k) q0_k 4**-(k-1) / f0(1)``; the missing mass
        beyond k_max is ``1 - pmf.sum()``.
        """
        k = np.arange(1, k_max + 1)
        return binomial_ratio(k) * self.base.terms(k) / self.f0_at_1

    def constants(self) -> dict:
        return {
            "a": self.a,
            "c_circ": self.c_circ,
            "beta": self.beta,
            "f0_at_1": self.f0_at_1,
            "f0_prime_at_1": self.f0_prime_at_1,
            "K_max": self.truncation,
            "tail_bound": self.tail_bound,
        }


def build_weight_sequence(base: BaseSequence, *, tol: float = TAIL_TARGET,
                          k_max: int = DEFAULT_K_MAX) -> WeightSequence:
    s = eval_auxiliary_series(base, 1.0, tol=tol, k_max=k_max)
    if s.derivative <= 0.0:
        raise DegenerateSeries("f0'(1) = 0: the base must charge some k >= 2")
    c_circ = 4.0 / s.derivative
    beta = 0.25 / (1.0 + s.value / s.derivative)
    return WeightSequence(
        base=base,
        c_circ=c_circ,
        beta=beta,
        f0_at_1=s.value,
        f0_prime_at_1=s.derivative,
        truncation=s.truncation,
        tail_bound=s.tail_bound,
        a=base.a,
    )


def quadrangulation_weights() -> WeightSequence:
    """Critical pure quadrangulations: q_2 = 1/12 and no other face."""
    return build_weight_sequence(BaseSequence.custom([0.0, 1.0]))


@dataclass(frozen=True)
class PartitionAsymptotics:
    """Large-p behaviour ``Z^(p) ~ c_bullet beta**-p p**-a`` of the disk function."""

    a: float
    beta: float
    c_bullet: float | None = None

    @property
    def sin_factor(self) -> float:
        return 2.0 * math.sin(math.pi * (self.a - 1.5))

    def partition(self, p: int) -> float:
        if self.c_bullet is None:
            raise ValueError("c_bullet unknown")
        return self.c_bullet * self.beta ** (-p) * p ** (-self.a)


def q_from_partition(a: float, beta: float, Z_k: float, k: int) -> float:
    """Asymptotic face weight ``2 sin(pi(a-3/2)) beta**(2k) Z^(k)``."""
    if not 1.5 < a < 2.5:
        raise OutOfRange(f"a={a} outside (3/2, 5/2)")
    if beta <= 0 or Z_k < 0 or k < 1:
        raise OutOfRange("need beta > 0, Z_k >= 0 and k >= 1")
    return 2.0 * math.sin(math.pi * (a - 1.5)) * beta ** (2 * k) * Z_k


def q_from_loop_partition(n: float, beta: float, Z_k: float, k: int) -> float:
    """Loop-model form ``n beta**(2k) Z^(k)`` with ``beta = h1 + 2 h2``."""
    if not 0.0 <= n <= 2.0 or beta <= 0 or Z_k < 0 or k < 1:
        raise OutOfRange("need n in [0,2], beta > 0, Z_k >= 0 and k >= 1")
    return n * beta ** (2 * k) * Z_k
