"""Sequence and pattern probabilities under an i.i.d. source, and sampling.

The probability of a pattern is the sum, over injective assignments of its
``m`` indices to the ``k`` letters, of ``prod_i theta_f(i) ** n_i``.  It is
evaluated with a dynamic program over subsets of pattern indices that sweeps
the letters one at a time; every term is positive so nothing cancels.
"""
from __future__ import annotations

import functools
import itertools
import math
import warnings
from typing import Sequence

import numpy as np

from .distributions import Distribution
from .errors import InfeasibleError
from .patterns import is_valid_pattern, multiplicities

DP_MAX_M = 64
DP_WARN_M = 24
BRUTE_MAX_M = 8
BRUTE_MAX_K = 10
SAMPLER = "numpy-pcg64/inverse-cdf/v1"

_LN2 = math.log(2.0)
# natural-log floor below which the linear-domain DP could lose terms to underflow
_LINEAR_FLOOR = -600.0


def sequence_prob(d: Distribution, x: Sequence[int]) -> float:
    return 2.0 ** log2_sequence_prob(d, x)


def log2_sequence_prob(d: Distribution, x: Sequence[int]) -> float:
    x = np.asarray(x, dtype=np.int64)
    if x.size == 0:
        return 0.0
    if x.min() < 1 or x.max() > d.k:
        raise ValueError(f"letter index outside 1..{d.k}")
    return math.fsum(np.log2(d.theta[x - 1]))


def _check_pattern(p: Sequence[int]) -> list[int]:
    if not is_valid_pattern(p):
        raise ValueError(f"not a valid pattern: {tuple(p)!r}")
    return multiplicities(p)


def pattern_prob_exact(d: Distribution, p: Sequence[int], max_m: int = DP_MAX_M) -> float:
    """Exact probability of pattern ``p``; 0 when it has more indices than ``d`` has letters."""
    lp = log2_pattern_prob(d, p, max_m=max_m)
    return 0.0 if lp == -math.inf else 2.0**lp


def log2_pattern_prob(d: Distribution, p: Sequence[int], max_m: int = DP_MAX_M) -> float:
    mult = _check_pattern(p)
    return log2_profile_prob(d, mult, max_m=max_m)


def log2_profile_prob(d: Distribution, mult: Sequence[int], max_m: int = DP_MAX_M) -> float:
    """log2 probability of any pattern with the given index multiplicities."""
    profile = tuple(sorted((int(v) for v in mult), reverse=True))
    m = len(profile)
    if m > d.k:
        return -math.inf
    if m > max_m:
        raise InfeasibleError(
            f"exact probability infeasible: pattern has m={m} distinct indices "
            f"(cap {max_m}); use the uniform closed form or Monte Carlo"
        )
    if m > DP_WARN_M:
        warnings.warn(f"subset DP over 2^{m} states will be slow", RuntimeWarning, stacklevel=2)
    return _log2_profile_cached(d, profile)


@functools.lru_cache(maxsize=1 << 16)
def _log2_profile_cached(d: Distribution, profile: tuple[int, ...]) -> float:
    m = len(profile)
    if m == 0:
        return 0.0
    ln_theta = np.log(d.theta)
    mult = np.asarray(profile, dtype=float)
    # scale index i by theta_max ** n_i so every weight is <= 1
    ln_w = np.outer(mult, ln_theta - ln_theta[-1])  # (m, k)
    scale = float(mult.sum()) * ln_theta[-1]
    # largest single term: biggest multiplicities on the biggest letters
    best = float(np.dot(mult, (ln_theta - ln_theta[-1])[::-1][:m]))
    if best > _LINEAR_FLOOR:
        val = _subset_dp_linear(np.exp(ln_w))
        return (math.log(val) + scale) / _LN2
    return (_subset_dp_log(ln_w) + scale) / _LN2


def _subset_dp_linear(w: np.ndarray) -> float:
    m, k = w.shape
    size = 1 << m
    state = np.zeros(size)
    state[0] = 1.0
    comp = np.zeros(size)
    inc = np.empty(size)
    for j in range(k):
        inc.fill(0.0)
        for i in range(m):
            src = state.reshape(-1, 2, 1 << i)
            dst = inc.reshape(-1, 2, 1 << i)
            dst[:, 1, :] += src[:, 0, :] * w[i, j]
        # Kahan-compensated accumulation across letters
        y = inc - comp
        t = state + y
        comp = (t - state) - y
        state = t
    return float(state[-1])


def _subset_dp_log(ln_w: np.ndarray) -> float:
    m, k = ln_w.shape
    size = 1 << m
    state = np.full(size, -np.inf)
    state[0] = 0.0
    for j in range(k):
        inc = np.full(size, -np.inf)
        for i in range(m):
            src = state.reshape(-1, 2, 1 << i)
            dst = inc.reshape(-1, 2, 1 << i)
            dst[:, 1, :] = np.logaddexp(dst[:, 1, :], src[:, 0, :] + ln_w[i, j])
        state = np.logaddexp(state, inc)
    return float(state[-1])


def pattern_prob_bruteforce(d: Distribution, p: Sequence[int]) -> float:
    """Direct sum over all injective index-to-letter assignments (test oracle)."""
    mult = _check_pattern(p)
    m, k = len(mult), d.k
    if m > BRUTE_MAX_M or k > BRUTE_MAX_K:
        raise InfeasibleError(
            f"brute force limited to m <= {BRUTE_MAX_M}, k <= {BRUTE_MAX_K} (got m={m}, k={k})"
        )
    theta = [float(t) for t in d.theta]
    terms = []
    for f in itertools.permutations(range(k), m):
        prod = 1.0
        for i, j in enumerate(f):
            prod *= theta[j] ** mult[i]
        terms.append(prod)
    return math.fsum(terms)


def log2_pattern_prob_uniform_profile(k: int, m: int, n: int) -> float:
    if m > k:
        return -math.inf
    if m <= 4096:
        falling = math.fsum(math.log2(k - i) for i in range(m))
    else:
        falling = (math.lgamma(k + 1) - math.lgamma(k - m + 1)) / _LN2
    return falling - n * math.log2(k)


def pattern_prob_uniform(k: int, p: Sequence[int]) -> float:
    """``k (k-1) ... (k-m+1) / k**n`` for a uniform source over ``k`` letters."""
    lp = log2_pattern_prob_uniform(k, p)
    return 0.0 if lp == -math.inf else 2.0**lp


def log2_pattern_prob_uniform(k: int, p: Sequence[int]) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    mult = _check_pattern(p)
    return log2_pattern_prob_uniform_profile(k, len(mult), len(p))


def derive_seed(seed: int, task: int) -> np.random.SeedSequence:
    """Per-task seed: ``SeedSequence([seed, task])``."""
    return np.random.SeedSequence([int(seed), int(task)])


def sample_letters(d: Distribution, size, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws of 1-based letter indices; ``size`` may be a shape tuple."""
    cdf = np.cumsum(d.theta)
    u = rng.random(size)
    idx = np.searchsorted(cdf, u, side="right")
    np.minimum(idx, d.k - 1, out=idx)
    return idx + 1


def sample_sequence(d: Distribution, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. letters (1-based), deterministic per ``(seed, d, n)``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.Generator(np.random.PCG64(seed))
    return sample_letters(d, n, rng)
