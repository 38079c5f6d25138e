"""I.i.d. source parameters, their entropies, and standard families."""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

SUM_TOLERANCE = 1e-6
FAMILIES = ("uniform", "zipf", "geometric", "power_alpha", "two_level")


class Distribution:
    """Ascending probability vector over the ``k`` letters with positive mass.

    The constructor expects probabilities already in ascending order; use
    :meth:`from_weights` for arbitrary order.  Zero entries are dropped, and a
    total within ``1e-6`` of one is silently renormalised (totals already within
    ``1e-12`` are kept as given).
    """

    __slots__ = ("_theta",)

    def __init__(self, theta: Sequence[float]):
        t = np.asarray(theta, dtype=float).ravel()
        if t.size == 0:
            raise ValueError("distribution needs at least one letter")
        if not np.all(np.isfinite(t)) or np.any(t < 0):
            raise ValueError("probabilities must be finite and non-negative")
        t = t[t > 0]
        if t.size == 0:
            raise ValueError("distribution has no positive mass")
        if np.any(np.diff(t) < 0):
            raise ValueError("probabilities must be sorted ascending")
        total = math.fsum(t)
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        if abs(total - 1.0) > 1e-12:
            # leave near-exact vectors alone so a JSON round trip reproduces them bit for bit
            t = t / total
        t.flags.writeable = False
        self._theta = t

    @classmethod
    def from_weights(cls, weights: Sequence[float], normalize: bool = False) -> "Distribution":
        w = np.sort(np.asarray(weights, dtype=float).ravel())
        if normalize:
            s = math.fsum(w)
            if not s > 0:
                raise ValueError("weights must have positive total")
            w = w / s
        return cls(w)

    @property
    def theta(self) -> np.ndarray:
        return self._theta

    @property
    def k(self) -> int:
        return int(self._theta.size)

    def is_uniform(self) -> bool:
        t = self._theta
        return bool(t[-1] - t[0] <= 1e-15 * t[-1])

    def __len__(self) -> int:
        return self.k

    def __eq__(self, other) -> bool:
        return isinstance(other, Distribution) and np.array_equal(self._theta, other._theta)

    def __hash__(self) -> int:
        return hash(self._theta.tobytes())

    def __repr__(self) -> str:
        if self.k <= 6:
            return f"Distribution({self._theta.tolist()})"
        return f"Distribution(k={self.k}, min={self._theta[0]:.4g}, max={self._theta[-1]:.4g})"


@dataclass(frozen=True)
class AnalysisConfig:
    """Sequence length ``n`` and grid parameter ``epsilon``; all logs are base 2."""

    n: int
    epsilon: float = 0.1

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "epsilon", float(self.epsilon))


def _neg_xlog2x(x: np.ndarray | float) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x = x[x > 0]
    return math.fsum(-x * np.log2(x))


def iid_entropy(d: Distribution) -> float:
    """Per-symbol entropy in bits."""
    return _neg_xlog2x(d.theta)


def packed_entropy_01(d: Distribution, cfg: AnalysisConfig) -> float:
    """Entropy with every letter of eta bins 0 and 1 merged into one super-symbol."""
    from .grids import bin_stats

    st = bin_stats(d, cfg)
    return _neg_xlog2x(st.phi_01) + _neg_xlog2x(d.theta[st.k_01:])


def packed_entropy_0_1(d: Distribution, cfg: AnalysisConfig) -> float:
    """Entropy with eta bins 0 and 1 merged into one super-symbol each."""
    from .grids import bin_stats

    st = bin_stats(d, cfg)
    return _neg_xlog2x(st.phi_0) + _neg_xlog2x(st.phi_1) + _neg_xlog2x(d.theta[st.k_01:])


def make_family(kind: str, **params) -> Distribution:
    """Build a standard distribution.

    ``uniform(k)``, ``zipf(k, s)``, ``geometric(k, p)``, ``power_alpha(n, alpha)``
    (``round(n**alpha)`` letters of equal mass) and
    ``two_level(k_small, k_large, mass_small)``.
    """
    if kind not in FAMILIES:
        raise ValueError(f"unknown family {kind!r}; expected one of {', '.join(FAMILIES)}")

    def need(name, typ=float):
        if name not in params:
            raise ValueError(f"family {kind!r} requires parameter {name!r}")
        v = params[name]
        if typ is int:
            if float(v) != int(float(v)):
                raise ValueError(f"parameter {name!r} must be an integer, got {v!r}")
            return int(float(v))
        return float(v)

    def positive_int(name):
        v = need(name, int)
        if v < 1:
            raise ValueError(f"parameter {name!r} must be >= 1, got {v}")
        return v

    extra = set(params) - {
        "uniform": {"k"},
        "zipf": {"k", "s"},
        "geometric": {"k", "p"},
        "power_alpha": {"n", "alpha"},
        "two_level": {"k_small", "k_large", "mass_small"},
    }[kind]
    if extra:
        raise ValueError(f"unexpected parameters for {kind!r}: {sorted(extra)}")

    if kind == "uniform":
        k = positive_int("k")
        return Distribution(np.full(k, 1.0 / k))
    if kind == "zipf":
        k = positive_int("k")
        s = need("s")
        if not s > 0:
            raise ValueError("zipf exponent s must be > 0")
        w = np.arange(1, k + 1, dtype=float) ** -s
        return Distribution.from_weights(w, normalize=True)
    if kind == "geometric":
        k = positive_int("k")
        p = need("p")
        if not 0 < p < 1:
            raise ValueError("geometric p must lie in (0, 1)")
        w = np.exp(np.arange(k) * math.log1p(-p))
        return Distribution.from_weights(w, normalize=True)
    if kind == "power_alpha":
        n = positive_int("n")
        alpha = need("alpha")
        if not alpha > 0:
            raise ValueError("alpha must be > 0")
        k = max(1, int(round(n ** alpha)))
        return Distribution(np.full(k, 1.0 / k))
    # two_level
    ks = positive_int("k_small")
    kl = positive_int("k_large")
    ms = need("mass_small")
    if not 0 < ms < 1:
        raise ValueError("mass_small must lie in (0, 1)")
    if ms / ks > (1 - ms) / kl:
        raise ValueError("small letters must not outweigh large letters")
    return Distribution(np.concatenate([np.full(ks, ms / ks), np.full(kl, (1 - ms) / kl)]))


def parse_family_spec(spec: str) -> Distribution:
    """Parse ``"family:NAME,key=value,..."``."""
    if not spec.startswith("family:"):
        raise ValueError(f"family spec must start with 'family:': {spec!r}")
    name, *pairs = spec[len("family:"):].split(",")
    params = {}
    for kv in pairs:
        if "=" not in kv:
            raise ValueError(f"malformed parameter {kv!r} in {spec!r}")
        key, value = kv.split("=", 1)
        params[key.strip()] = value.strip()
    return make_family(name.strip(), **params)


def load_distribution(text: str) -> Distribution:
    """Read a distribution from a JSON array of decimals or a family spec string."""
    text = text.strip()
    if text.startswith("family:"):
        return parse_family_spec(text)
    values = json.loads(text)
    if not isinstance(values, list):
        raise ValueError("distribution JSON must be an array of numbers")
    return Distribution.from_weights(values)


def empirical_counts(tokens: Sequence[Hashable]) -> tuple[Distribution, dict]:
    """Relative frequencies plus the token -> letter index (1-based) map.

    Letters are ordered by ascending frequency, ties broken by first occurrence,
    so letter ``i`` carries probability ``theta[i - 1]``.
    """
    if len(tokens) == 0:
        raise ValueError("empirical distribution of an empty token list")
    counts = Counter(tokens)
    first = {}
    for pos, t in enumerate(tokens):
        first.setdefault(t, pos)
    order = sorted(counts, key=lambda t: (counts[t], first[t]))
    total = len(tokens)
    d = Distribution(np.array([counts[t] for t in order], dtype=float) / total)
    return d, {t: i + 1 for i, t in enumerate(order)}


def empirical_distribution(tokens: Sequence[Hashable]) -> Distribution:
    return empirical_counts(tokens)[0]


def to_json(d: Distribution) -> str:
    return json.dumps([float(x) for x in d.theta])
