"""High-precision reference evaluations used to cross-check the float code paths.

Everything here is computed with mpmath at ``DPS`` decimal digits and shares
no arithmetic with the production routines.
"""
from __future__ import annotations

import itertools
from typing import Sequence

import mpmath

DPS = 50


def _mp(x):
    with mpmath.workdps(DPS):
        return mpmath.mpf(x)


def log2_factorial(k: int) -> float:
    with mpmath.workdps(DPS):
        return float(mpmath.loggamma(k + 1) / mpmath.log(2))


def log2_falling_factorial(k: int, m: int) -> float:
    m = min(k, m)
    with mpmath.workdps(DPS):
        return float((mpmath.loggamma(k + 1) - mpmath.loggamma(k - m + 1)) / mpmath.log(2))


def range_decreases(k: int, n: int, epsilon: float) -> tuple[float, float]:
    """Minimum and maximum decrease of the pattern entropy below ``nH`` for uniform ``k``."""
    with mpmath.workdps(DPS):
        k_, n_, eps = mpmath.mpf(k), mpmath.mpf(n), mpmath.mpf(epsilon)
        lo = (1 - eps) * mpmath.mpf(3) / 2 * k_ * mpmath.log(
            k_ / (mpmath.e ** (mpmath.mpf(2) / 3) * mpmath.cbrt(n_)), 2
        )
        hi = (mpmath.loggamma(k_ + 1) - mpmath.loggamma(k_ - min(k_, n_) + 1)) / mpmath.log(2)
        return float(lo), float(hi)


def occupancy(theta: Sequence[float], n: int) -> float:
    """Expected number of distinct letters among ``theta`` seen in ``n`` draws."""
    with mpmath.workdps(DPS):
        return float(mpmath.fsum(1 - (1 - mpmath.mpf(float(t))) ** n for t in theta))


def iid_entropy(theta: Sequence[float]) -> float:
    with mpmath.workdps(DPS):
        return float(-mpmath.fsum(mpmath.mpf(float(t)) * mpmath.log(mpmath.mpf(float(t)), 2) for t in theta if t > 0))


def pattern_prob(theta: Sequence[float], pattern: Sequence[int]) -> float:
    """Sum over injective index-to-letter maps, accumulated in mpmath."""
    counts: dict[int, int] = {}
    for v in pattern:
        counts[v] = counts.get(v, 0) + 1
    mult = [counts[i] for i in sorted(counts)]
    with mpmath.workdps(DPS):
        th = [mpmath.mpf(float(t)) for t in theta]
        total = mpmath.mpf(0)
        for f in itertools.permutations(range(len(th)), len(mult)):
            term = mpmath.mpf(1)
            for i, j in enumerate(f):
                term *= th[j] ** mult[i]
            total += term
        return float(total)
