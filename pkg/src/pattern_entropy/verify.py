"""Acceptance checks, grouped into named suites for the CLI and the test-suite.

Each check returns a :class:`CheckResult`; nothing here raises on a failed
comparison, so a full run always reports every line.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import oracles
from .bounds import (
    bound_report,
    figure1_data,
    thm1_bounds,
    thm2_decrease,
    thm2_upper,
    thm3_lower,
    thm5_upper,
    thm6_lower,
)
from .coder import decode, encode, expected_code_length, ideal_code_length, payload_bits
from .distributions import AnalysisConfig, Distribution, iid_entropy, make_family
from .entropy import (
    decomposition_entropies,
    joint_pattern_bin_entropy_exact,
    pattern_entropy_exact,
    pattern_entropy_mc,
    pattern_entropy_via_sequences,
)
from .grids import bin_stats, occupancy, occupancy_bounds, occupancy_bounds_bin0
from .patterns import enumerate_patterns, extract_pattern
from .probability import (
    log2_profile_prob,
    pattern_prob_bruteforce,
    pattern_prob_exact,
    sample_sequence,
)


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    expected_failures: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.passed = bool(self.passed)  # checks often produce numpy booleans

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:>2} {self.title}: {self.detail} ({self.seconds:.1f}s)"


# --- random case generators -----------------------------------------------------


def random_theta(rng: np.random.Generator, k: int) -> Distribution:
    """Dirichlet weights with a random concentration (sorted ascending)."""
    alpha = float(np.exp(rng.uniform(np.log(0.2), np.log(5.0))))
    w = rng.gamma(alpha, size=k) + 1e-3
    return Distribution.from_weights(w, normalize=True)


def random_distribution(rng: np.random.Generator, k: int) -> Distribution:
    kind = rng.integers(5)
    if kind == 0 or k == 1:
        return make_family("uniform", k=k)
    if kind == 1:
        return make_family("zipf", k=k, s=float(rng.uniform(0.3, 2.0)))
    if kind == 2:
        return make_family("geometric", k=k, p=float(rng.uniform(0.001, 0.2)))
    if kind == 3:
        ks = int(rng.integers(1, k))
        mass = float(rng.uniform(0.001, 0.5)) * ks / k
        return make_family("two_level", k_small=ks, k_large=k - ks, mass_small=mass)
    return random_theta(rng, k)


def random_pattern(rng: np.random.Generator, n: int, m_max: int) -> tuple[int, ...]:
    out, top = [], 0
    for _ in range(n):
        v = int(rng.integers(1, min(top + 1, m_max) + 1))
        top = max(top, v)
        out.append(v)
    return tuple(out)


def _log_uniform_int(rng: np.random.Generator, lo: int, hi: int) -> int:
    return int(round(math.exp(rng.uniform(math.log(lo), math.log(hi)))))


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# --- criteria ---------------------------------------------------------------------


def check_pattern_fidelity() -> CheckResult:
    want = (1, 2, 3, 3, 1, 4, 3, 3)
    got = [extract_pattern(w) for w in ("lossless", "sellsoll")]
    ok = all(g == want for g in got)
    return CheckResult(1, "pattern fidelity", ok, "lossless, sellsoll -> " + ", ".join("".join(map(str, g)) for g in got))


def check_probability_oracle(cases: int = 500, seed: int = 11) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        k = int(rng.integers(1, 7))
        d = random_theta(rng, k)
        m_max = int(rng.integers(1, 6))
        p = random_pattern(rng, int(rng.integers(1, 11)), m_max)
        a, b = pattern_prob_exact(d, p), pattern_prob_bruteforce(d, p)
        if a == b == 0.0:
            continue
        worst = max(worst, _rel(a, b))
    return CheckResult(2, "probability oracle", worst <= 1e-12, f"max relative error {worst:.3g} over {cases} cases")


def entropy_grid(seed: int = 13, per_cell: int = 20):
    """The (d, n) cases shared by the entropy-oracle and sandwich checks."""
    rng = np.random.default_rng(seed)
    for k in (2, 3, 4):
        for n in range(2, 9):
            for _ in range(per_cell):
                yield random_theta(rng, k), n


def check_entropy_oracle(seed: int = 13) -> CheckResult:
    worst, count = 0.0, 0
    for d, n in entropy_grid(seed):
        a = pattern_entropy_exact(d, n).value
        b = pattern_entropy_via_sequences(d, n).value
        worst = max(worst, abs(a - b))
        count += 1
    return CheckResult(3, "entropy oracle", worst <= 1e-9, f"max |exact - sequences| {worst:.3g} over {count} cases")


def check_normalization(seed: int = 17, per_cell: int = 3) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in range(1, 11):
        pats = list(enumerate_patterns(n))
        for k in (1, 2, 3, 4):
            for _ in range(per_cell):
                d = random_theta(rng, k)
                total = math.fsum(pattern_prob_exact(d, p) for p in pats)
                worst = max(worst, abs(total - 1.0))
    return CheckResult(4, "normalisation", worst <= 1e-9, f"max |sum P - 1| {worst:.3g} for n <= 10, k <= 4")


def check_thm1_sandwich(seed: int = 13) -> CheckResult:
    bad, count = [], 0
    for d, n in entropy_grid(seed):
        h = pattern_entropy_exact(d, n).value
        nh = n * iid_entropy(d)
        raw_lower = nh - oracles.log2_falling_factorial(d.k, n)
        if not raw_lower - 1e-9 <= h <= nh + 1e-9:
            bad.append((d, n))
        count += 1
    d = Distribution([0.5, 0.5])
    lo, _ = thm1_bounds(d, 2)
    h = pattern_entropy_exact(d, 2).value
    eq_ok = abs(lo - 1.0) <= 1e-12 and abs(h - 1.0) <= 1e-12
    ok = not bad and eq_ok
    return CheckResult(
        5, "non-asymptotic sandwich", ok,
        f"{count - len(bad)}/{count} sandwiched; coin n=2 lower={lo:.12g} exact={h:.12g}",
    )


def check_occupancy(cases: int = 1000, seed: int = 19) -> CheckResult:
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(cases):
        n = _log_uniform_int(rng, 2, 5000)
        eps = float(rng.uniform(0.05, 0.6))
        cfg = AnalysisConfig(n, eps)
        k = _log_uniform_int(rng, 1, 3000)
        d = random_distribution(rng, k)
        st = bin_stats(d, cfg)
        if st.k_0:
            lo, hi = occupancy_bounds_bin0(d, cfg)
            exact = oracles.occupancy(d.theta[: st.k_0], n)
            slack = 1e-12 * max(exact, 1e-300)
            if not lo - slack <= exact <= hi + slack:
                failures += 1
        for b in np.flatnonzero(st.k_b):
            lo, hi = occupancy_bounds(d, cfg, int(b))
            exact = float(st.L_b[b])
            slack = 1e-12 * max(exact, 1.0)
            if not lo - slack <= exact <= hi + slack:
                failures += 1
    # the printed exponent fails on a single letter of mass 0.1 at n = 10
    d = Distribution([0.1] * 10)
    cfg = AnalysisConfig(10)
    b = int(bin_stats(d, cfg).letter_bins[0])
    _, printed = occupancy_bounds(d, cfg, b, printed_exponent=True)
    exact_one = float(occupancy(np.array([0.1]), 10)[0])
    printed_one = printed / 10
    shown = printed_one < exact_one
    ok = failures == 0 and shown
    return CheckResult(
        6, "occupancy inequalities", ok,
        f"{failures} violations over {cases} cases; printed exponent at theta=0.1, n=10: "
        f"{printed_one:.4f} < exact {exact_one:.4f} (expected failure)",
        expected_failures=["printed exponent theta - theta^2"] if shown else [],
    )


def coder_fuzz_case(rng: np.random.Generator, max_k: int = 10_000, max_n: int = 10_000):
    n = _log_uniform_int(rng, 2, max_n)
    k = _log_uniform_int(rng, 1, max_k)
    eps = float(rng.uniform(0.05, 0.5))
    d = random_distribution(rng, k)
    length = n if rng.random() < 0.8 else int(rng.integers(0, n + 1))
    x = sample_sequence(d, length, int(rng.integers(2**32)))
    return d, AnalysisConfig(n, eps), x


def fuzz_coder(cases: int, seed: int = 23) -> tuple[int, int, float]:
    """(lossless failures, budget failures, worst budget margin in bits)."""
    rng = np.random.default_rng(seed)
    lost = over = 0
    worst = -math.inf
    for _ in range(cases):
        d, cfg, x = coder_fuzz_case(rng)
        blob = encode(d, cfg, x)
        pattern, bins = decode(d, cfg, blob)
        want_bins = tuple(int(v) for v in bin_stats(d, cfg).letter_bins[x - 1]) if x.size else ()
        if pattern != extract_pattern(x.tolist()) or bins != want_bins:
            lost += 1
        ideal = ideal_code_length(d, cfg, pattern, bins)
        margin = payload_bits(blob) - ideal - 32 - 0.015 * x.size
        worst = max(worst, margin)
        over += margin > 0
    return lost, over, worst


def check_coder(cases: int = 10_000, seed: int = 23) -> CheckResult:
    lost, over, worst = fuzz_coder(cases, seed)
    rng = np.random.default_rng(seed + 1)
    gaps = []
    for k in (1, 2, 3):
        for n in range(2, 8):
            for _ in range(3):
                d = random_theta(rng, k)
                cfg = AnalysisConfig(n, float(rng.uniform(0.05, 0.9)))
                q = expected_code_length(d, cfg).value
                joint = joint_pattern_bin_entropy_exact(d, cfg).value
                h = pattern_entropy_exact(d, n).value
                gaps.append(min(q - joint, joint - h))
    worst_gap = min(gaps)
    ok = lost == 0 and over == 0 and worst_gap >= -1e-9
    return CheckResult(
        7, "coder", ok,
        f"{cases} round trips, {lost} lossy, {over} over budget (worst margin {worst:.2f} bits); "
        f"min ordering gap {worst_gap:.3g} over {len(gaps)} exact cases",
    )


def check_decomposition(cases: int = 100, seed: int = 29) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_id = worst_z = 0.0
    for _ in range(cases):
        k = int(rng.integers(2, 5))
        n = int(rng.integers(2, 8))
        cfg = AnalysisConfig(n, float(rng.uniform(0.05, 0.95)))
        dec = decomposition_entropies(random_theta(rng, k), cfg)
        worst_id = max(worst_id, abs(dec.residual()))
        worst_z = max(worst_z, abs(dec.h_z - dec.h_z_closed_form))
    ok = worst_id <= 1e-9 and worst_z <= 1e-9
    return CheckResult(
        8, "decomposition", ok, f"max identity residual {worst_id:.3g}, max |H(Z) - n h2| {worst_z:.3g}"
    )


def check_figure1() -> CheckResult:
    cfg = AnalysisConfig(10**6, 0.1)
    rows = figure1_data(cfg, 159, 10**6, 200)
    ks = np.array([r[0] for r in rows])
    lo = np.array([r[1] for r in rows])
    hi = np.array([r[2] for r in rows])
    ordered = bool(np.all(lo <= hi))
    monotone = bool(np.all(np.diff(lo) > 0) and np.all(np.diff(hi) > 0))
    at = [r for r in figure1_data(cfg, 10**4, 10**4, 1)][0]
    ref = oracles.range_decreases(10**4, 10**6, 0.1)
    err = max(_rel(at[1], ref[0]), _rel(at[2], ref[1]))
    ok = ordered and monotone and err <= 1e-6 and ks[0] == 159 and ks[-1] == 10**6
    return CheckResult(
        9, "range of decrease", ok,
        f"{len(rows)} rows; k=1e4 -> ({at[1]:.6g}, {at[2]:.6g}) vs oracle rel err {err:.2g}; "
        f"ordered={ordered} monotone={monotone}",
    )


def check_monte_carlo(samples: int = 100_000, seed: int = 31) -> CheckResult:
    k, n = 50, 2000
    d = make_family("uniform", k=k)
    est = pattern_entropy_mc(d, n, samples, seed)
    nh = n * math.log2(k)
    lower = nh - oracles.log2_factorial(k)
    s = est.stderr
    # every sample holds all 50 letters here, so s == 0 and the estimate sits on
    # the lower edge; allow float rounding of the two routes to that value
    tol = 1e-12 * nh
    ok = lower - 3 * s - tol <= est.value <= nh + 3 * s + tol
    return CheckResult(
        10, "Monte Carlo sandwich", ok,
        f"H = {est.value:.6f} +- {s:.3g}, window [{lower:.4f}, {nh:.4f}] (log2 50! = {oracles.log2_factorial(k):.4f})",
    )


def _large_letter_distribution(rng: np.random.Generator, cfg: AnalysisConfig, margin: float) -> Distribution:
    """Random weights with every letter above ``margin * n^-(1-eps)``."""
    floor = margin * cfg.n ** -(1 - cfg.epsilon)
    k_max = max(1, int(0.2 / floor))  # mean weight 2.5/k keeps the minimum above floor
    k = int(rng.integers(1, min(k_max, 2000) + 1))
    while True:
        w = rng.uniform(1.0, 4.0, size=k)
        w /= w.sum()
        if w.min() > floor:
            return Distribution.from_weights(w)


def check_reductions(cases: int = 200, seed: int = 37) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst5 = worst6 = 0.0
    for i in range(cases):
        cfg = AnalysisConfig(_log_uniform_int(rng, 100, 10**6), float(rng.uniform(0.05, 0.5)))
        d = _large_letter_distribution(rng, cfg, 1.6)
        st = bin_stats(d, cfg)
        assert st.k_01 == 0 and st.k2_minus == 0 and st.k2_plus == 0
        worst5 = max(worst5, abs(thm5_upper(d, cfg).value_bits - thm2_upper(d, cfg).value_bits))
        worst6 = max(worst6, abs(thm6_lower(d, cfg).value_bits - thm3_lower(d, cfg).value_bits))
    ok = worst5 <= 1e-9 and worst6 <= 1e-9
    return CheckResult(
        11, "bound reductions", ok, f"max |thm5 - thm2| {worst5:.3g}, max |thm6 - thm3| {worst6:.3g} over {cases}"
    )


def check_diagnostics() -> CheckResult:
    cfg = AnalysisConfig(10**6, 0.1)
    d = make_family("uniform", k=100)
    dec = thm2_decrease(d, cfg)
    ref = 0.9 * oracles.log2_factorial(100)
    rep = bound_report(d, cfg)
    consistent = True
    for e in rep.bounds:
        if e.applicable:
            consistent &= e.value_bits is not None and math.isfinite(e.value_bits)
            consistent &= e.decrease_bits is None or e.decrease_bits >= 0 or e.clamped
        else:
            consistent &= e.value_bits is None
    ok = abs(dec - ref) <= 1e-6 and consistent
    return CheckResult(
        12, "bound diagnostics", ok, f"thm2 decrease {dec:.8f} vs 0.9 log2 100! = {ref:.8f}; report consistent={consistent}"
    )


CHECKS: dict[int, Callable[[], CheckResult]] = {
    1: check_pattern_fidelity,
    2: check_probability_oracle,
    3: check_entropy_oracle,
    4: check_normalization,
    5: check_thm1_sandwich,
    6: check_occupancy,
    7: check_coder,
    8: check_decomposition,
    9: check_figure1,
    10: check_monte_carlo,
    11: check_reductions,
    12: check_diagnostics,
}

SUITES: dict[str, tuple[int, ...]] = {
    "patterns": (1,),
    "oracles": (2, 3, 4),
    "thm1": (5, 10),
    "occupancy": (6,),
    "coder": (7,),
    "decomposition": (8,),
    "figure1": (9,),
    "bounds": (11, 12),
    "all": tuple(CHECKS),
}


def run_check(number: int) -> CheckResult:
    t0 = time.perf_counter()
    res = CHECKS[number]()
    res.seconds = time.perf_counter() - t0
    return res


def run_suite(name: str) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return [run_check(i) for i in SUITES[name]]
