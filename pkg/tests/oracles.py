"""Independent oracles shared by the test modules."""
from math import comb, factorial

import numpy as np

from qgmaps.errors import NonPlanar
from qgmaps.maps import PlanarMap


def tutte_count(n: int) -> int:
    """Rooted planar quadrangulations with n faces (= rooted maps with n edges)."""
    return 2 * 3**n * factorial(2 * n) // (factorial(n) * factorial(n + 2))


def perfect_matchings(items):
    if not items:
        yield []
        return
    a = items[0]
    for i in range(1, len(items)):
        rest = items[1:i] + items[i + 1:]
        for m in perfect_matchings(rest):
            yield [(a, items[i])] + m


def enumerate_quadrangulations(n: int):
    """All rooted and all rooted pointed planar quadrangulations with n faces.

    Faces are fixed as the 4-cycles (0123)(4567)...; every way of pairing the
    4n sides into edges is tried and the planar connected ones are kept.
    Returns (set of rooted codes, set of pointed codes)."""
    H = 4 * n
    phi = [4 * (h // 4) + (h + 1) % 4 for h in range(H)]
    rooted, pointed = set(), set()
    for pairs in perfect_matchings(list(range(H))):
        new = [0] * H
        alpha = [0] * H
        for i, (a, b) in enumerate(pairs):
            new[a], new[b] = 2 * i, 2 * i + 1
            alpha[a], alpha[b] = b, a
        sigma = np.empty(H, dtype=np.int64)
        for h in range(H):
            sigma[new[h]] = new[phi[alpha[h]]]
        try:
            m = PlanarMap(sigma)
        except NonPlanar:
            continue
        for r in range(H):
            rooted.add(m.with_root(r).rooted_code())
            for v in range(m.n_vertices):
                pointed.add(PlanarMap(sigma, r, v).pointed_code())
    return rooted, pointed


def pointed_law(max_faces: int = 3) -> dict:
    """Target law of the pointed sampler for quadrangulations: P ∝ 12**-n."""
    weights = {}
    for n in range(1, max_faces + 1):
        for code in enumerate_quadrangulations(n)[1]:
            weights[code] = 12.0**-n
    total = sum(weights.values())
    return {k: v / total for k, v in weights.items()}


def conditioned_rim_law(size: int, t: float) -> np.ndarray:
    """P(#trans = j) for ``size`` independent quads, trans with probability t,
    conditioned on an even number of cis quads."""
    p = np.array([comb(size, j) * t**j * (1 - t) ** (size - j) if (size - j) % 2 == 0 else 0.0
                  for j in range(size + 1)])
    return p / p.sum()


def rooted_law(max_faces: int = 3) -> dict:
    """Target law of the unpointed sampler for quadrangulations: P ∝ 12**-n."""
    weights = {}
    for n in range(1, max_faces + 1):
        for code in enumerate_quadrangulations(n)[0]:
            weights[code] = 12.0**-n
    total = sum(weights.values())
    return {k: v / total for k, v in weights.items()}
