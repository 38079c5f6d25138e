"""Pattern entropy: exact enumeration, a sequence-level oracle, and Monte Carlo."""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .distributions import AnalysisConfig, Distribution
from .bounds import binary_entropy
from .errors import InfeasibleError
from .grids import bin_stats
from .patterns import DEFAULT_ENUMERATION_CAP, enumerate_patterns, multiplicities
from .probability import (
    DP_WARN_M,
    derive_seed,
    log2_pattern_prob_uniform_profile,
    log2_profile_prob,
    sample_letters,
)

SEQUENCE_LIMIT = 10**8
_CHUNK_ELEMS = 1 << 22


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    stderr: float
    method: str
    samples: int = 0
    n: int = 0
    k: int = 0
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "value_bits": self.value,
            "stderr_bits": self.stderr,
            "method": self.method,
            "samples": self.samples,
            "n": self.n,
            "k": self.k,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class Decomposition:
    """The four terms of ``H(P) = H(P|Z) + H(Z) - H(Z|P)`` plus the closed-form ``H(Z)``."""

    h_pattern: float
    h_pattern_given_z: float
    h_z: float
    h_z_given_pattern: float
    h_z_closed_form: float

    def residual(self) -> float:
        return self.h_pattern - (self.h_pattern_given_z + self.h_z - self.h_z_given_pattern)

    def to_json(self) -> dict:
        return asdict(self)


def entropy_of(masses) -> float:
    """Shannon entropy in bits of a collection of probabilities (zeros ignored)."""
    p = np.asarray(list(masses) if not isinstance(masses, np.ndarray) else masses, dtype=float)
    p = p[p > 0]
    return max(0.0, math.fsum(-p * np.log2(p)))


def pattern_entropy_exact(
    d: Distribution, n: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> EntropyEstimate:
    """Sum ``-P log2 P`` over every length-``n`` pattern."""
    # probability depends only on the multiplicity multiset, so tally those
    profiles: Counter = Counter()
    for p in enumerate_patterns(n, cap=cap):
        profiles[tuple(sorted(multiplicities(p), reverse=True))] += 1
    terms = []
    for prof, count in profiles.items():
        lp = log2_profile_prob(d, prof)
        if lp == -math.inf:
            continue
        terms.append(-count * 2.0**lp * lp)
    return EntropyEstimate(max(0.0, math.fsum(terms)), 0.0, "exact_patterns", n=n, k=d.k)


# --- sequence-level enumeration ------------------------------------------------


def _check_sequence_scale(k: int, n: int) -> None:
    if k**n > SEQUENCE_LIMIT:
        raise InfeasibleError(
            f"sequence enumeration infeasible: k^n = {k}^{n} exceeds {SEQUENCE_LIMIT:.0e}"
        )


def _sequence_chunks(d: Distribution, n: int):
    """Yield ``(letters, probs)`` covering all ``k**n`` sequences; letters are 0-based."""
    k = d.k
    total = k**n
    rows = max(1, _CHUNK_ELEMS // max(n, 1))
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, rows):
        idx = np.arange(start, min(total, start + rows), dtype=np.int64)
        letters = (idx[:, None] // powers[None, :]) % k
        probs = np.prod(d.theta[letters], axis=1)
        yield letters, probs


def patterns_of_rows(letters: np.ndarray) -> np.ndarray:
    """First-occurrence relabelling of every row (vectorised over rows)."""
    rows, n = letters.shape
    if n == 0:
        return np.zeros((rows, 0), dtype=np.int64)
    k = int(letters.max()) + 1
    label = np.zeros((rows, k), dtype=np.int64)
    count = np.zeros(rows, dtype=np.int64)
    out = np.empty((rows, n), dtype=np.int64)
    r = np.arange(rows)
    for j in range(n):
        col = letters[:, j]
        cur = label[r, col]
        fresh = cur == 0
        count[fresh] += 1
        label[r[fresh], col[fresh]] = count[fresh]
        out[:, j] = label[r, col]
    return out


def _encode_rows(a: np.ndarray, base: int) -> np.ndarray:
    code = np.zeros(a.shape[0], dtype=np.int64)
    for j in range(a.shape[1]):
        code = code * base + a[:, j]
    return code


def _aggregate(d: Distribution, n: int, aux=None) -> dict:
    """Map ``(pattern_code, aux_code)`` -> probability mass over all sequences."""
    _check_sequence_scale(d.k, n)
    base = min(d.k, n) + 1
    mass: dict = {}
    for letters, probs in _sequence_chunks(d, n):
        keys = np.empty((letters.shape[0], 2), dtype=np.int64)
        keys[:, 0] = _encode_rows(patterns_of_rows(letters), base)
        keys[:, 1] = 0 if aux is None else aux(letters)
        uniq, inv = np.unique(keys, axis=0, return_inverse=True)
        sums = np.bincount(inv.ravel(), weights=probs, minlength=len(uniq))
        for (pk, ak), s in zip(map(tuple, uniq), sums):
            mass[(pk, ak)] = mass.get((pk, ak), 0.0) + s
    return mass


def _marginal(mass: dict, axis: int) -> dict:
    out: dict = {}
    for key, v in mass.items():
        out[key[axis]] = out.get(key[axis], 0.0) + v
    return out


def pattern_entropy_via_sequences(d: Distribution, n: int) -> EntropyEstimate:
    """Enumerate all ``k**n`` sequences and aggregate their mass by pattern."""
    mass = _aggregate(d, n)
    return EntropyEstimate(entropy_of(mass.values()), 0.0, "exact_sequences", n=n, k=d.k)


def _bin_aux(d: Distribution, cfg: AnalysisConfig):
    bins = np.asarray(bin_stats(d, cfg).letter_bins)
    occupied = np.unique(bins)
    rank = np.searchsorted(occupied, bins)
    base = len(occupied)
    return lambda letters: _encode_rows(rank[letters], base)


def _z_aux(d: Distribution, cfg: AnalysisConfig):
    # Z_j = 1 when the letter lies above n^-(1-eps), i.e. outside eta bins 0 and 1
    z = (np.asarray(bin_stats(d, cfg).letter_bins) >= 2).astype(np.int64)
    return lambda letters: _encode_rows(z[letters], 2)


def joint_pattern_bin_entropy_exact(d: Distribution, cfg: AnalysisConfig) -> EntropyEstimate:
    """Exact ``H(pattern, eta-bin sequence)``."""
    mass = _aggregate(d, cfg.n, _bin_aux(d, cfg))
    return EntropyEstimate(entropy_of(mass.values()), 0.0, "exact_sequences", n=cfg.n, k=d.k)


def pattern_bin_masses(d: Distribution, cfg: AnalysisConfig) -> list[tuple[tuple, tuple, float]]:
    """Every reachable ``(pattern, bin sequence)`` pair with its probability."""
    _check_sequence_scale(d.k, cfg.n)
    bins = np.asarray(bin_stats(d, cfg).letter_bins)
    acc: dict = {}
    for letters, probs in _sequence_chunks(d, cfg.n):
        pats = patterns_of_rows(letters)
        bs = bins[letters]
        for p, b, w in zip(map(tuple, pats.tolist()), map(tuple, bs.tolist()), probs):
            acc[(p, b)] = acc.get((p, b), 0.0) + w
    return [(p, b, w) for (p, b), w in acc.items()]


def _conditional_entropy(mass: dict, given_axis: int) -> float:
    groups: dict = {}
    for key, v in mass.items():
        groups.setdefault(key[given_axis], []).append(v)
    terms = []
    for vals in groups.values():
        total = math.fsum(vals)
        if total > 0:
            terms.append(total * entropy_of(np.asarray(vals) / total))
    return math.fsum(terms)


def decomposition_entropies(d: Distribution, cfg: AnalysisConfig) -> Decomposition:
    """Exact terms of the pattern-entropy split by the small/large-letter indicator ``Z``."""
    mass = _aggregate(d, cfg.n, _z_aux(d, cfg))
    h_pattern = entropy_of(_marginal(mass, 0).values())
    h_z = entropy_of(_marginal(mass, 1).values())
    # small-letter mass = eta bins 0 and 1
    phi = bin_stats(d, cfg).phi_01
    return Decomposition(
        h_pattern=h_pattern,
        h_pattern_given_z=_conditional_entropy(mass, 1),
        h_z=h_z,
        h_z_given_pattern=_conditional_entropy(mass, 0),
        h_z_closed_form=cfg.n * binary_entropy(min(1.0, phi)),
    )


# --- Monte Carlo ----------------------------------------------------------------


def _mc_chunk(args) -> np.ndarray:
    d, n, rows, seed, task, max_m = args
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, task)))
    letters = sample_letters(d, (rows, n), rng)
    k = d.k
    uniform = d.is_uniform()
    if n == 0:
        return np.zeros(rows)
    s = np.sort(letters, axis=1)
    fresh = s[:, 1:] != s[:, :-1]
    if uniform:
        m = fresh.sum(axis=1) + 1
        table = _uniform_table(k, n, int(m.max()))
        return -table[m]
    out = np.empty(rows)
    for r in range(rows):
        cuts = np.flatnonzero(fresh[r]) + 1
        runs = np.diff(np.concatenate(([0], cuts, [n])))
        if runs.size > max_m:
            raise InfeasibleError(
                f"per-sample pattern probability infeasible: sample has m={runs.size} "
                f"distinct letters, exact DP capped at m={max_m} for non-uniform sources"
            )
        out[r] = -log2_profile_prob(d, runs)
    return out


def _uniform_table(k: int, n: int, m_max: int) -> np.ndarray:
    return np.array([log2_pattern_prob_uniform_profile(k, m, n) for m in range(m_max + 1)])


def pattern_entropy_mc(
    d: Distribution,
    n: int,
    samples: int,
    seed: int,
    jobs: int = 1,
    max_m: int = DP_WARN_M,
) -> EntropyEstimate:
    """Mean of ``-log2 P(pattern)`` over sampled sequences, with its standard error.

    Chunk ``c`` draws from ``SeedSequence([seed, c])``; the chunk layout depends
    only on ``(n, samples)``, so ``jobs`` does not change the result.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rows = max(1, min(samples, _CHUNK_ELEMS // max(n, 1)))
    tasks = []
    for c, start in enumerate(range(0, samples, rows)):
        tasks.append((d, n, min(rows, samples - start), seed, c, max_m))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_mc_chunk, tasks))
    else:
        parts = [_mc_chunk(t) for t in tasks]
    vals = np.concatenate(parts)
    mean = math.fsum(vals) / samples
    if samples == 1:
        return EntropyEstimate(mean, 0.0, "monte_carlo", 1, n, d.k, degenerate=True)
    var = math.fsum((vals - mean) ** 2) / (samples - 1)
    return EntropyEstimate(mean, math.sqrt(var / samples), "monte_carlo", samples, n, d.k)
