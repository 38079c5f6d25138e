"""The eta and xi probability grids and the per-bin statistics built on them.

Bins are half-open on the left: bin ``b`` of a grid holds the probabilities in
``(points[b], points[b + 1]]``.  The last bin runs from the last point up to 1.
"""
from __future__ import annotations

import functools
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .distributions import AnalysisConfig, Distribution

UPPER_BOUND_THETA_MAX = 3 / 5


@dataclass(frozen=True, eq=False)
class GridSpec:
    kind: str
    n: int
    epsilon: float
    points: np.ndarray
    B: int

    @property
    def n_bins(self) -> int:
        return self.B + 1

    def upper(self, b: int) -> float:
        """Right edge of bin ``b``."""
        return float(self.points[b + 1]) if b < self.B else 1.0

    def to_json(self) -> dict:
        pts = [float(x) for x in self.points]
        digest = hashlib.sha256(np.ascontiguousarray(self.points, dtype="<f8").tobytes())
        return {
            "kind": self.kind,
            "n": self.n,
            "epsilon": self.epsilon,
            "B": self.B,
            "points_head": pts[:10],
            "points_tail": pts[-10:],
            "points_sha256": digest.hexdigest(),
        }


@functools.lru_cache(maxsize=32)
def build_eta_grid(cfg: AnalysisConfig) -> GridSpec:
    n, eps = cfg.n, cfg.epsilon
    shift = n ** (1.5 * eps) - 2.0
    B = math.floor(n ** ((1 + 2 * eps) / 2) - n ** (1.5 * eps) + 2)
    if B < 2:
        raise ValueError(f"grid degenerate: B={B} < 2 for n={n}, epsilon={eps}")
    b = np.arange(B + 1, dtype=float)
    pts = (b + shift) ** 2 / n ** (1 + 2 * eps)
    pts[0] = 0.0
    pts[1] = n ** -(1 + eps)
    # anchor: the closed form at b = 2 equals n^-(1-eps) up to rounding
    pts[2] = n ** -(1 - eps)
    pts.flags.writeable = False
    return GridSpec("eta", n, eps, pts, B)


@functools.lru_cache(maxsize=32)
def build_xi_grid(cfg: AnalysisConfig) -> GridSpec:
    n, eps = cfg.n, cfg.epsilon
    B = math.floor(n ** ((1 - eps) / 2))
    # B = 1 is legitimate for very short sequences (n <= 4 at eps = 0.1)
    if B < 1:
        raise ValueError(f"grid degenerate: B={B} < 1 for n={n}, epsilon={eps}")
    pts = np.arange(B + 1, dtype=float) ** 2 / n ** (1 - eps)
    pts.flags.writeable = False
    return GridSpec("xi", n, eps, pts, B)


def bin_of(g: GridSpec, p: float) -> int:
    if not 0.0 < p <= 1.0:
        raise ValueError(f"probability must lie in (0, 1], got {p!r}")
    return int(np.searchsorted(g.points, p, side="left")) - 1


def bins_of(g: GridSpec, p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0) or np.any(p > 1):
        raise ValueError("probabilities must lie in (0, 1]")
    return np.searchsorted(g.points, p, side="left") - 1


def occupancy(theta: np.ndarray, n: int) -> np.ndarray:
    """``1 - (1 - theta)**n`` evaluated in log space."""
    theta = np.asarray(theta, dtype=float)
    with np.errstate(divide="ignore"):
        return -np.expm1(n * np.log1p(-theta))


@dataclass(frozen=True, eq=False)
class BinStats:
    eta: GridSpec
    xi: GridSpec
    letter_bins: np.ndarray  # eta bin of every letter, ascending
    k_b: np.ndarray
    phi_b: np.ndarray
    L_b: np.ndarray
    kappa: np.ndarray  # kappa[b - 1] for b = 1..B_xi
    k2_minus: int
    k2_plus: int

    @property
    def k_0(self) -> int:
        return int(self.k_b[0])

    @property
    def k_1(self) -> int:
        return int(self.k_b[1])

    @property
    def k_01(self) -> int:
        return self.k_0 + self.k_1

    @property
    def phi_0(self) -> float:
        return float(self.phi_b[0])

    @property
    def phi_1(self) -> float:
        return float(self.phi_b[1])

    @property
    def phi_01(self) -> float:
        return self.phi_0 + self.phi_1

    @property
    def L_0(self) -> float:
        return float(self.L_b[0])

    @property
    def L_1(self) -> float:
        return float(self.L_b[1])

    @property
    def L_01(self) -> float:
        return self.L_0 + self.L_1

    def slice(self, b: int) -> slice:
        """Index range of the (ascending) letters that fall in eta bin ``b``."""
        lo = int(self.k_b[:b].sum())
        return slice(lo, lo + int(self.k_b[b]))


@functools.lru_cache(maxsize=64)
def bin_stats(d: Distribution, cfg: AnalysisConfig) -> BinStats:
    theta = d.theta
    eta = build_eta_grid(cfg)
    xi = build_xi_grid(cfg)
    letter_bins = np.searchsorted(eta.points, theta, side="left") - 1
    nb = eta.n_bins
    k_b = np.bincount(letter_bins, minlength=nb)
    # letters are sorted, so every bin is a contiguous run
    edges = np.concatenate([[0], np.cumsum(k_b)])
    occ = occupancy(theta, cfg.n)
    phi_b = np.zeros(nb)
    L_b = np.zeros(nb)
    for b in np.flatnonzero(k_b):
        phi_b[b] = math.fsum(theta[edges[b]:edges[b + 1]])
        L_b[b] = math.fsum(occ[edges[b]:edges[b + 1]])
    letter_bins.flags.writeable = False
    return BinStats(
        eta=eta,
        xi=xi,
        letter_bins=letter_bins,
        k_b=k_b,
        phi_b=phi_b,
        L_b=L_b,
        kappa=kappa_counts(d, cfg),
        k2_minus=_count_in(theta, 0.5 * eta.points[2], eta.points[2]),
        k2_plus=_count_in(theta, eta.points[2], 1.5 * eta.points[2]),
    )


def _count_in(sorted_theta: np.ndarray, lo: float, hi: float) -> int:
    """Number of entries in ``(lo, hi]``."""
    return int(np.searchsorted(sorted_theta, hi, side="right") - np.searchsorted(sorted_theta, lo, side="right"))


def kappa_counts(d: Distribution, cfg: AnalysisConfig) -> np.ndarray:
    """Letters in the xi window around each point ``b = 1..B``.

    ``kappa_1`` counts ``(xi_1, xi_2]``; ``kappa_b`` counts ``(xi_{b-1}, xi_{b+1}]``.
    """
    B = build_xi_grid(cfg).B
    ext = np.arange(B + 2, dtype=float) ** 2 / cfg.n ** (1 - cfg.epsilon)
    b = np.arange(1, B + 1)
    lo = ext[b - 1]
    lo[0] = ext[1]
    hi = ext[b + 1]
    t = d.theta
    return np.searchsorted(t, hi, side="right") - np.searchsorted(t, lo, side="right")


def occupancy_bounds(
    d: Distribution, cfg: AnalysisConfig, b: int, printed_exponent: bool = False
) -> tuple[float, float]:
    """Lower and upper bounds on the mean number of distinct bin-``b`` letters.

    The upper bound uses ``exp(-n (theta + theta^2))`` over letters with
    ``theta <= 3/5``.  ``printed_exponent=True`` swaps in ``theta - theta^2``,
    which is *not* a valid bound (e.g. theta=0.1, n=10).
    """
    st = bin_stats(d, cfg)
    if not 0 <= b < st.eta.n_bins:
        raise ValueError(f"bin {b} outside eta grid 0..{st.eta.B}")
    t = d.theta[st.slice(b)]
    if t.size == 0:
        return 0.0, 0.0
    n = cfg.n
    lower = t.size - math.fsum(np.exp(-n * t))
    small = t[t <= UPPER_BOUND_THETA_MAX]
    expo = small - small**2 if printed_exponent else small + small**2
    upper = t.size - math.fsum(np.exp(-n * expo))
    return lower, upper


def occupancy_bounds_bin0(d: Distribution, cfg: AnalysisConfig) -> tuple[float, float]:
    """Second- and third-order Bonferroni bounds on the bin-0 occupancy."""
    st = bin_stats(d, cfg)
    if st.k_0 == 0:
        return 0.0, 0.0
    t = d.theta[: st.k_0]
    n = cfg.n
    lower = n * st.phi_0 - math.comb(n, 2) * math.fsum(t**2)
    upper = lower + math.comb(n, 3) * math.fsum(t**3)
    return lower, upper
