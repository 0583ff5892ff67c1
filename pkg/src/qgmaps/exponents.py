"""Closed-form exponents of the critical O(n) loop model on random surfaces.

A model point is parameterised by the tail exponent ``a`` of the disk
partition function.  From it follow the Coulomb-gas coupling ``g = a - 1``,
the SLE parameter ``kappa = 4/g``, the loop weight ``n = -2 cos(pi g)``, the
central charge and the Liouville parameter ``gamma^2 = min(kappa, 16/kappa)``.
The quantum exponents are obtained through the KPZ map and combine into the
surface dimension, which is 4 on the whole critical line.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import NegativeDiscriminant, OutOfRange, PhaseUnsupported

A_MIN = 1.5
A_MAX = 2.5


class Phase(enum.Enum):
    DENSE = "dense"
    DILUTE = "dilute"
    PURE_GRAVITY = "pure_gravity"


@dataclass(frozen=True)
class ModelPoint:
    a: float
    n: float
    g: float
    kappa: float
    c: float
    gamma_sq: float
    phase: Phase
    nu: float
    boundary: bool = False


@dataclass(frozen=True)
class ExponentSet:
    x_gasket: float
    x_four: float
    x_two: float
    delta_gasket: float
    delta_four: float
    delta_two: float
    delta_boundary: float
    d_gasket_euclidean: float
    dim_gasket: float
    dim_surface: float
    dim_loops: float
    nu: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class RivalPrediction:
    c: float
    d1: float  # math.inf at c = 1
    d2: float
    d_claimed: float = 4.0


@dataclass(frozen=True)
class PottsPoint:
    Q: float


@dataclass(frozen=True)
class MulticriticalModel:
    m: int


def central_charge(kappa: float) -> float:
    return (6.0 - kappa) * (6.0 - 16.0 / kappa) / 4.0


def _point(a: float, phase: Phase, boundary: bool) -> ModelPoint:
    g = a - 1.0
    kappa = 4.0 / g
    n = 2.0 * math.sin(math.pi * (a - 1.5))
    # sin(pi) is not exactly zero in floating point
    if a == A_MAX:
        n = 0.0
    elif a == 2.0:
        n = 2.0
    nu = g if phase is Phase.DENSE else 1.0
    return ModelPoint(
        a=a,
        n=n,
        g=g,
        kappa=kappa,
        c=central_charge(kappa),
        gamma_sq=min(kappa, 16.0 / kappa),
        phase=phase,
        nu=nu,
        boundary=boundary,
    )


def model_point_from_a(a: float) -> ModelPoint:
    """Model point for tail exponent ``a`` in (3/2, 5/2].

    ``a = 2`` (n = 2) is tagged Dilute with ``boundary=True``; both branch
    formulas agree there.  ``a = 5/2`` is the pure-gravity point.
    """
    a = float(a)
    if not (A_MIN < a <= A_MAX) or math.isnan(a):
        raise OutOfRange(f"tail exponent a={a} outside (3/2, 5/2]")
    if a == A_MAX:
        return _point(a, Phase.PURE_GRAVITY, boundary=False)
    if a < 2.0:
        return _point(a, Phase.DENSE, boundary=False)
    return _point(a, Phase.DILUTE, boundary=(a == 2.0))


def model_point_from_n(n: float, phase: Phase | str) -> ModelPoint:
    """Invert ``n = 2 sin(pi (a - 3/2))`` on the requested branch.

    The endpoints ``n = 0`` are kept on their branch (a = 3/2 for Dense,
    a = 5/2 for Dilute) and flagged with ``boundary=True``.
    """
    phase = Phase(phase)
    n = float(n)
    if not 0.0 <= n <= 2.0:
        raise OutOfRange(f"loop weight n={n} outside [0, 2]")
    if phase is Phase.PURE_GRAVITY:
        raise OutOfRange("model_point_from_n needs the Dense or Dilute branch")
    shift = math.asin(n / 2.0) / math.pi
    a = A_MIN + shift if phase is Phase.DENSE else A_MAX - shift
    boundary = n == 0.0 or n == 2.0
    if n == 2.0:
        a = 2.0
    return _point(a, phase, boundary)


def kpz_forward(delta: float, gamma_sq: float) -> float:
    """Euclidean exponent ``x`` of a quantum exponent ``delta``."""
    if not 0.0 < gamma_sq <= 4.0:
        raise OutOfRange(f"gamma^2={gamma_sq} outside (0, 4]")
    return gamma_sq * delta * delta / 4.0 + (1.0 - gamma_sq / 4.0) * delta


def kpz_inverse(x: float, gamma_sq: float) -> float:
    """Quantum exponent on the root branch through (x, delta) = (0, 0)."""
    if not 0.0 < gamma_sq <= 4.0:
        raise OutOfRange(f"gamma^2={gamma_sq} outside (0, 4]")
    b = 1.0 - gamma_sq / 4.0
    disc = b * b + gamma_sq * x
    if disc < 0.0:
        raise NegativeDiscriminant(f"x={x} lies below the KPZ vertex for gamma^2={gamma_sq}")
    root = math.sqrt(disc)
    # rationalised form avoids cancellation when x is small
    if b > 0.0:
        return 2.0 * x / (root + b)
    return (root - b) / (gamma_sq / 2.0)


def watermelon_x(legs: int, g: float) -> float:
    """Euclidean L-leg exponent ``g L^2/16 - (1-g)^2/(4g)``."""
    return g * legs * legs / 16.0 - (1.0 - g) ** 2 / (4.0 * g)


def exponent_set(point: ModelPoint) -> ExponentSet:
    if point.phase is Phase.PURE_GRAVITY:
        raise PhaseUnsupported("no loop exponents at the pure-gravity point; D_H = 4")
    g = point.g
    x_gasket = (8.0 - 4.0 * g - 3.0 / g) / 16.0
    x_four = (3.0 * g + 2.0 - 1.0 / g) / 4.0
    x_two = watermelon_x(2, g)
    dim_gasket = 2.0 * point.a - 1.0
    if point.phase is Phase.DILUTE:
        nu = 1.0
        delta_gasket = (3.0 - 2.0 * g) / 4.0
        delta_four = (1.0 + g) / 2.0
        delta_two = 0.5
        delta_boundary = 2.0 * delta_gasket - (1.0 - g)
    else:
        nu = g
        delta_gasket = (2.0 - 1.0 / g) / 4.0
        delta_four = (3.0 - 1.0 / g) / 2.0
        delta_two = 1.0 - 1.0 / (2.0 * g)
        delta_boundary = 2.0 * delta_gasket
    dim_surface = dim_gasket / (nu * (1.0 - delta_gasket))
    dim_loops = nu * dim_surface * (1.0 - delta_two)
    return ExponentSet(
        x_gasket=x_gasket,
        x_four=x_four,
        x_two=x_two,
        delta_gasket=delta_gasket,
        delta_four=delta_four,
        delta_two=delta_two,
        delta_boundary=delta_boundary,
        d_gasket_euclidean=2.0 - 2.0 * x_gasket,
        dim_gasket=dim_gasket,
        dim_surface=dim_surface,
        dim_loops=dim_loops,
        nu=nu,
    )


def kpz_residuals(point: ModelPoint) -> dict[str, float]:
    """Differences between each closed-form quantum exponent and the
    inverse-KPZ image of its Euclidean counterpart."""
    ex = exponent_set(point)
    gs = point.gamma_sq
    return {
        "gasket": ex.delta_gasket - kpz_inverse(ex.x_gasket, gs),
        "four": ex.delta_four - kpz_inverse(ex.x_four, gs),
        "two": ex.delta_two - kpz_inverse(ex.x_two, gs),
    }


def surface_dimension(point: ModelPoint) -> float:
    if point.phase is Phase.PURE_GRAVITY:
        return 4.0
    return exponent_set(point).dim_surface


def rival_predictions(c: float) -> RivalPrediction:
    """Earlier conjectures D1(c) and D2(c) next to the constant 4."""
    c = float(c)
    if c > 1.0 or math.isnan(c):
        raise OutOfRange(f"central charge c={c} > 1")
    s25 = math.sqrt(25.0 - c)
    s1 = math.sqrt(1.0 - c)
    d1 = math.inf if c == 1.0 else s25 / s1 - 1.0
    d2 = 2.0 * (s25 + math.sqrt(49.0 - c)) / (s25 + s1)
    return RivalPrediction(c=c, d1=d1, d2=d2)


def potts_point(potts: PottsPoint | float) -> ModelPoint:
    Q = potts.Q if isinstance(potts, PottsPoint) else float(potts)
    if not 0.0 <= Q <= 4.0:
        raise OutOfRange(f"Potts Q={Q} outside [0, 4]")
    return model_point_from_n(math.sqrt(Q), Phase.DENSE)


def multicritical_dimension(model: MulticriticalModel | int) -> int:
    m = model.m if isinstance(model, MulticriticalModel) else model
    if int(m) != m or m < 1:
        raise OutOfRange(f"multicritical order m={m} must be an integer >= 1")
    return 2 * (int(m) + 1)
