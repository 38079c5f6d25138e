"""Upper and lower bounds on pattern entropy, and the band of possible decrease below nH.

All values are in bits.  Bounds whose derivation drops vanishing correction
terms (or carries a ``(1 - epsilon)`` factor) are flagged ``asymptotic``; they
are evaluated from their explicit terms only.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from .distributions import (
    AnalysisConfig,
    Distribution,
    iid_entropy,
    make_family,
    packed_entropy_0_1,
    packed_entropy_01,
)
from .grids import bin_stats

LOG2E = math.log2(math.e)
REPORT_SCHEMA = "pattern-entropy/bound-report"
REPORT_VERSION = 1
BOUND_NAMES = (
    "thm1_lower",
    "thm1_upper",
    "eq12_upper",
    "thm2_upper",
    "thm3_lower",
    "thm4_lower",
    "thm4_upper",
    "thm5_upper",
    "thm6_lower",
)
ASYMPTOTIC = frozenset(BOUND_NAMES) - {"thm1_lower", "thm1_upper"}


def log2_factorial(x: int) -> float:
    """log2(x!), exact summation for x <= 20 and log-gamma above."""
    if x < 0:
        raise ValueError("factorial of a negative number")
    if x <= 20:
        return math.log2(math.factorial(x))
    return math.lgamma(x + 1) / math.log(2)


def log2_falling_factorial(k: int, m: int) -> float:
    """log2(k! / (k - m)!)."""
    m = min(m, k)
    return log2_factorial(k) - log2_factorial(k - m)


def log2_binomial(a: int, b: int) -> float:
    return log2_factorial(a) - log2_factorial(b) - log2_factorial(a - b)


def binary_entropy(alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"binary entropy argument must lie in [0, 1], got {alpha!r}")
    if alpha == 0.0 or alpha == 1.0:
        return 0.0
    return -alpha * math.log2(alpha) - (1 - alpha) * math.log2(1 - alpha)


def _sum_log2_factorials(counts: Iterable[int]) -> float:
    return math.fsum(log2_factorial(int(c)) for c in counts if c > 1)


@dataclass
class BoundEntry:
    name: str
    value_bits: float | None
    applicable: bool
    asymptotic: bool
    decrease_bits: float | None = None
    clamped: bool = False
    notes: str = ""


@dataclass
class BoundReport:
    n: int
    epsilon: float
    k: int
    iid_total_bits: float
    bounds: list[BoundEntry] = field(default_factory=list)

    def __getitem__(self, name: str) -> BoundEntry:
        for e in self.bounds:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "version": REPORT_VERSION,
            "n": self.n,
            "epsilon": self.epsilon,
            "k": self.k,
            "iid_total_bits": self.iid_total_bits,
            "bounds": [asdict(e) for e in self.bounds],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "BoundReport":
        obj = json.loads(text)
        if obj.get("schema") != REPORT_SCHEMA or obj.get("version") != REPORT_VERSION:
            raise ValueError("not a bound report of a supported version")
        return cls(
            n=obj["n"],
            epsilon=obj["epsilon"],
            k=obj["k"],
            iid_total_bits=obj["iid_total_bits"],
            bounds=[BoundEntry(**e) for e in obj["bounds"]],
        )

    def violations(self, exact_bits: float) -> dict[str, float]:
        """Distance by which an exact entropy falls outside each applicable bound.

        Positive numbers are violations.  For asymptotic bounds at small ``n``
        these are diagnostics, not failures.
        """
        out = {}
        for e in self.bounds:
            if not e.applicable or e.value_bits is None:
                continue
            if e.name.endswith("_upper"):
                out[e.name] = exact_bits - e.value_bits
            else:
                out[e.name] = e.value_bits - exact_bits
        return out


def _nh(d: Distribution, n: int) -> float:
    return n * iid_entropy(d)


def _large_letters_only(d: Distribution, cfg: AnalysisConfig) -> bool:
    return bool(d.theta[0] > cfg.n ** -(1 - cfg.epsilon))


def thm1_bounds(d: Distribution, n: int) -> tuple[float, float]:
    """Non-asymptotic sandwich ``nH - log2(k!/(k-min(k,n))!) <= H(pattern) <= nH``."""
    upper = _nh(d, n)
    lower = upper - log2_falling_factorial(d.k, n)
    return max(0.0, lower), upper


def _thm1_entries(d: Distribution, n: int) -> list[BoundEntry]:
    nh = _nh(d, n)
    dec = log2_falling_factorial(d.k, n)
    raw = nh - dec
    lower = BoundEntry("thm1_lower", max(0.0, raw), True, False, dec)
    if raw < 0:
        lower.clamped = True
        lower.notes = "clamped at 0 (entropy is non-negative)"
    upper = BoundEntry("thm1_upper", nh, True, False, 0.0)
    return [lower, upper]


def k_hat(d: Distribution, cfg: AnalysisConfig) -> int:
    """Letters whose chance of appearing in ``n`` draws is at least ``1 - epsilon``."""
    with np.errstate(divide="ignore"):
        log_miss = cfg.n * np.log1p(-d.theta)
    return int(np.count_nonzero(log_miss <= math.log(cfg.epsilon)))


def eq12_upper(d: Distribution, cfg: AnalysisConfig) -> BoundEntry:
    kh = k_hat(d, cfg)
    thresh = math.exp(19 / 18) * cfg.n ** (1 / 3)
    if not kh > thresh:
        return BoundEntry(
            "eq12_upper", None, False, True, notes=f"k_hat={kh} <= e^(19/18) n^(1/3) = {thresh:.6g}"
        )
    dec = (1 - cfg.epsilon) * 1.5 * kh * math.log2(kh / thresh)
    return BoundEntry("eq12_upper", _nh(d, cfg.n) - dec, True, True, dec, notes=f"k_hat={kh}")


def thm2_decrease(d: Distribution, cfg: AnalysisConfig) -> float:
    st = bin_stats(d, cfg)
    return (1 - cfg.epsilon) * _sum_log2_factorials(st.k_b[2:])


def thm2_upper(d: Distribution, cfg: AnalysisConfig) -> BoundEntry:
    if not _large_letters_only(d, cfg):
        return BoundEntry("thm2_upper", None, False, True, notes="requires theta_1 > n^-(1-eps)")
    dec = thm2_decrease(d, cfg)
    return BoundEntry("thm2_upper", _nh(d, cfg.n) - dec, True, True, dec)


def thm3_decrease(d: Distribution, cfg: AnalysisConfig) -> float:
    return _sum_log2_factorials(bin_stats(d, cfg).kappa)


def thm3_lower(d: Distribution, cfg: AnalysisConfig) -> BoundEntry:
    if not _large_letters_only(d, cfg):
        return BoundEntry("thm3_lower", None, False, True, notes="requires theta_1 > n^-(1-eps)")
    dec = thm3_decrease(d, cfg)
    return _clamped_lower("thm3_lower", _nh(d, cfg.n) - dec, dec, "o(1) term dropped")


def _clamped_lower(name: str, raw: float, dec: float | None, notes: str) -> BoundEntry:
    if raw < 0:
        return BoundEntry(name, 0.0, True, True, dec, True, (notes + "; clamped at 0").lstrip("; "))
    return BoundEntry(name, raw, True, True, dec, False, notes)


def thm4_threshold(cfg: AnalysisConfig) -> float:
    return cfg.n ** ((1 + cfg.epsilon) / 3)


def thm4_decreases(k: int, cfg: AnalysisConfig) -> tuple[float, float]:
    """(minimum, maximum) decrease from ``nH`` for an alphabet of ``k`` letters.

    The minimum is ``(1-eps)(3/2) k log2(k / (e^(2/3) n^(1/3)))``, the maximum
    ``log2(k!/(k-n)!)`` (``log2 k!`` when ``k <= n``).
    """
    n = cfg.n
    lo = (1 - cfg.epsilon) * 1.5 * k * (math.log2(k) - (2 / 3) * LOG2E - math.log2(n) / 3)
    hi = log2_falling_factorial(k, n)
    return lo, hi


def thm4_range(d_or_k, cfg: AnalysisConfig) -> tuple[BoundEntry, BoundEntry]:
    """Lower and upper entries; an int argument means the uniform source on that many letters."""
    d = make_family("uniform", k=int(d_or_k)) if isinstance(d_or_k, (int, np.integer)) else d_or_k
    k = d.k
    if not _large_letters_only(d, cfg):
        why = "requires theta_1 > n^-(1-eps)"
    elif k < thm4_threshold(cfg):
        why = f"requires k >= n^((1+eps)/3) = {thm4_threshold(cfg):.6g}"
    else:
        why = ""
    if why:
        return (
            BoundEntry("thm4_lower", None, False, True, notes=why),
            BoundEntry("thm4_upper", None, False, True, notes=why),
        )
    nh = _nh(d, cfg.n)
    min_dec, max_dec = thm4_decreases(k, cfg)
    lower = _clamped_lower("thm4_lower", nh - max_dec, max_dec, "")
    if min_dec < 0:
        # the formula exceeds nH for k < e^(2/3) n^(1/3); nH is always an upper bound
        upper = BoundEntry("thm4_upper", nh, True, True, 0.0, True, f"raw decrease {min_dec:.12g} < 0; clamped to nH")
    else:
        upper = BoundEntry("thm4_upper", nh - min_dec, True, True, min_dec)
    return lower, upper


def thm5_terms(d: Distribution, cfg: AnalysisConfig) -> dict[str, float]:
    """The five terms of the general upper bound, named by role."""
    st = bin_stats(d, cfg)
    n, eps = cfg.n, cfg.epsilon
    terms = {
        "packed_iid": n * packed_entropy_0_1(d, cfg),
        "first_occurrence_gain": -(1 - eps) * _sum_log2_factorials(st.k_b[2:]),
        "bin1_index": 0.0,
        "bin1_occupancy": 0.0,
        "bin0": 0.0,
    }
    if st.k_1 > 0:
        nphi1 = n * st.phi_1
        terms["bin1_index"] = (nphi1 - st.L_1) * math.log2(min(st.k_1, n))
        terms["bin1_occupancy"] = nphi1 * binary_entropy(min(1.0, st.L_1 / nphi1))
    if st.k_0 > 0:
        sq = math.fsum(d.theta[: st.k_0] ** 2)
        terms["bin0"] = (n * n / 2 * sq) * math.log2(
            2 * math.e * st.phi_0 * min(st.k_0, n) / (n * sq)
        )
    return terms


def thm5_upper(d: Distribution, cfg: AnalysisConfig) -> BoundEntry:
    t = thm5_terms(d, cfg)
    value = math.fsum(t.values())
    return BoundEntry("thm5_upper", value, True, True, _nh(d, cfg.n) - value)


def thm6_terms(d: Distribution, cfg: AnalysisConfig) -> dict[str, float]:
    """The six explicit terms of the general lower bound, named by role."""
    st = bin_stats(d, cfg)
    n = cfg.n
    theta = d.theta
    k01 = st.k_01
    phi = st.phi_01
    terms = {
        "packed_iid": n * packed_entropy_01(d, cfg),
        "first_occurrence_loss": -_sum_log2_factorials(st.kappa),
        "repeat_small": 0.0,
        "repeat_last_small": 0.0,
        "first_small": 0.0,
        "separation": -log2_binomial(st.k2_minus + st.k2_plus, st.k2_plus),
    }
    if k01 > 0:
        t = theta[: k01 - 1]
        w = n * t - 1 + np.exp(-n * (t + t**2 / phi))
        terms["repeat_small"] = math.fsum(w * np.log2(phi / t))
        tl = float(theta[k01 - 1])
        terms["repeat_last_small"] = (n * tl - 1) * math.log2(phi / tl)
        cutoff = math.floor(st.L_01)
        if cutoff > 1:
            i = np.arange(1, cutoff)
            terms["first_small"] = LOG2E * math.fsum((st.L_01 - i) * theta[i - 1] / phi)
    return terms


def thm6_lower(d: Distribution, cfg: AnalysisConfig) -> BoundEntry:
    t = thm6_terms(d, cfg)
    raw = math.fsum(t.values())
    return _clamped_lower("thm6_lower", raw, _nh(d, cfg.n) - raw, "o(1) term dropped")


def bound_report(d: Distribution, cfg: AnalysisConfig) -> BoundReport:
    rep = BoundReport(cfg.n, cfg.epsilon, d.k, _nh(d, cfg.n))
    rep.bounds.extend(_thm1_entries(d, cfg.n))
    rep.bounds.append(eq12_upper(d, cfg))
    rep.bounds.append(thm2_upper(d, cfg))
    rep.bounds.append(thm3_lower(d, cfg))
    rep.bounds.extend(thm4_range(d, cfg))
    rep.bounds.append(thm5_upper(d, cfg))
    rep.bounds.append(thm6_lower(d, cfg))
    return rep


def figure1_data(
    cfg: AnalysisConfig, k_min: float, k_max: float, steps: int
) -> list[tuple[int, float, float]]:
    """Rows ``(k, min_decrease_bits, max_decrease_bits)`` over log-spaced integer ``k``."""
    thr = thm4_threshold(cfg)
    if k_min < thr:
        raise ValueError(
            f"k_min={k_min} is below the applicability threshold n^((1+eps)/3) = {thr:.6g}"
        )
    if k_max < k_min or steps < 1:
        raise ValueError("need k_max >= k_min and steps >= 1")
    ks = np.unique(np.rint(np.geomspace(k_min, k_max, steps)).astype(np.int64))
    ks = ks[ks >= thr]
    return [(int(k), *thm4_decreases(int(k), cfg)) for k in ks]
