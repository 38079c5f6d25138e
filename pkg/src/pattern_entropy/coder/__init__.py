"""Sequential (pattern, bin) coder: ideal code lengths and a decodable compressor."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..distributions import AnalysisConfig, Distribution
from ..entropy import EntropyEstimate, pattern_bin_masses
from ..errors import CorruptPayloadError, HeaderMismatchError
from ..grids import bin_stats
from ..patterns import extract_pattern
from ..probability import derive_seed, sample_letters
from . import container
from .container import FLAG_TRUNCATED, Header
from .model import NEW, REPEAT, CoderModel, Event, default_rho
from .rangecoder import RangeDecoder, RangeEncoder

__all__ = [
    "CoderModel",
    "Event",
    "NEW",
    "REPEAT",
    "default_rho",
    "next_event_distribution",
    "ideal_code_length",
    "encode",
    "decode",
    "payload_bits",
    "expected_code_length",
    "optimize_rho",
]

_MC_CHUNK = 1 << 21


def next_event_distribution(model: CoderModel) -> list[tuple[Event, float]]:
    return model.next_event_distribution()


def _model_arrays(model: CoderModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    nb = model.stats.eta.n_bins
    phi, rho, k_b = np.zeros(nb), np.ones(nb), np.zeros(nb, dtype=np.int64)
    for b in model.active:
        phi[b], rho[b], k_b[b] = model.phi[b], model.rho[b], model.k_b[b]
    return phi, rho, k_b


def _check_pair(model: CoderModel, pattern: np.ndarray, bins: np.ndarray) -> np.ndarray:
    """Validate a (pattern, bins) stream; return the first-occurrence mask."""
    n = model.cfg.n
    if pattern.shape != bins.shape or pattern.ndim != 1:
        raise ValueError("pattern and bin sequence must be 1-D and of equal length")
    if pattern.size > n:
        raise ValueError(f"input has {pattern.size} symbols, more than n={n}")
    if pattern.size == 0:
        return np.zeros(0, dtype=bool)
    top = np.maximum.accumulate(pattern)
    prev = np.concatenate(([0], top[:-1]))
    if pattern.min() < 1 or np.any(pattern > prev + 1):
        raise ValueError("not a valid pattern (indices must appear in first-occurrence order)")
    new = pattern > prev
    first_bin = bins[new]
    if np.any(bins != first_bin[pattern - 1]):
        j = int(np.flatnonzero(bins != first_bin[pattern - 1])[0])
        raise ValueError(
            f"step {j + 1}: index {pattern[j]} carries bin {bins[j]}, "
            f"but first occurred with bin {first_bin[pattern[j] - 1]}"
        )
    nb = model.stats.eta.n_bins
    if first_bin.min() < 0 or first_bin.max() >= nb:
        raise ValueError("bin index outside the eta grid")
    used = np.bincount(first_bin, minlength=nb)
    over = np.flatnonzero(used > model.stats.k_b)
    if over.size:
        b = int(over[0])
        raise ValueError(f"bin {b} opened {used[b]} indices but holds only {model.stats.k_b[b]} letters")
    return new


def ideal_code_length(
    d: Distribution,
    cfg: AnalysisConfig,
    pattern: Sequence[int],
    bins: Sequence[int],
    rho0: float | None = None,
    rho1: float | None = None,
) -> float:
    """``-log2 Q`` of a jointly consistent (pattern, bin) stream, in bits."""
    model = CoderModel(d, cfg, rho0, rho1)
    p = np.asarray(pattern, dtype=np.int64)
    b = np.asarray(bins, dtype=np.int64)
    new = _check_pair(model, p, b)
    if p.size == 0:
        return 0.0
    phi, rho, _ = _model_arrays(model)
    nb_new = b[new]
    # rank of each new index among earlier new indices of the same bin
    order = np.argsort(nb_new, kind="stable")
    sorted_bins = nb_new[order]
    starts = np.searchsorted(sorted_bins, sorted_bins, side="left")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size) - starts
    cost_new = -np.log2(phi[nb_new] - rank * rho[nb_new])
    cost_rep = -np.log2(rho[b[~new]])
    return max(0.0, math.fsum(cost_new) + math.fsum(cost_rep))


def _resolve_input(model: CoderModel, d: Distribution, x, pattern, bins):
    if x is not None:
        if pattern is not None or bins is not None:
            raise ValueError("give either a letter sequence or (pattern, bins), not both")
        letters = np.asarray(x, dtype=np.int64).ravel()
        if letters.size and (letters.min() < 1 or letters.max() > d.k):
            bad = letters[(letters < 1) | (letters > d.k)][0]
            raise ValueError(f"letter {bad} outside the alphabet 1..{d.k}")
        pattern = np.asarray(extract_pattern(letters.tolist()), dtype=np.int64)
        bins = np.asarray(model.stats.letter_bins)[letters - 1] if letters.size else letters
    elif pattern is None or bins is None:
        raise ValueError("encode needs a letter sequence or both pattern and bins")
    p = np.asarray(pattern, dtype=np.int64).ravel()
    b = np.asarray(bins, dtype=np.int64).ravel()
    _check_pair(model, p, b)
    return p, b


def _header_for(model: CoderModel, flags: int, payload_len: int) -> Header:
    d, cfg = model.d, model.cfg
    return Header(
        flags=flags,
        n=cfg.n,
        epsilon=cfg.epsilon,
        k=d.k,
        rho0=model.rho0,
        rho1=model.rho1,
        digest=container.model_digest(d.theta, cfg.n, cfg.epsilon, model.rho0, model.rho1),
        payload_len=payload_len,
    )


def _encode_stream(
    model: CoderModel, pattern: Sequence[int], bins: Sequence[int], trace: list | None = None
) -> bytes:
    enc = RangeEncoder()
    encode_step = enc.encode
    quantised = model.quantised
    update = model.update
    event_for = model.event_for
    for psi, beta in zip(pattern, bins):
        ev = event_for(psi, beta)
        encode_step(*quantised(ev))
        update(ev)
        if trace is not None:
            trace.append(model.state_digest())
    return enc.finish()


def encode(
    d: Distribution,
    cfg: AnalysisConfig,
    x: Sequence[int] | None = None,
    *,
    pattern: Sequence[int] | None = None,
    bins: Sequence[int] | None = None,
    rho0: float | None = None,
    rho1: float | None = None,
    trace: list | None = None,
) -> bytes:
    """Compress letters ``x`` (1-based) or an explicit (pattern, bins) stream.

    ``trace``, when given, receives the model's state digest after every step.
    """
    model = CoderModel(d, cfg, rho0, rho1)
    p, b = _resolve_input(model, d, x, pattern, bins)
    body = _encode_stream(model, p.tolist(), b.tolist(), trace)
    flags = 0
    if p.size < cfg.n:
        flags |= FLAG_TRUNCATED
        body = container.leb128(int(p.size)) + body
    return container.pack(_header_for(model, flags, len(body)), body)


def decode(
    d: Distribution,
    cfg: AnalysisConfig,
    blob: bytes,
    rho0: float | None = None,
    rho1: float | None = None,
    trace: list | None = None,
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Recover (pattern, bins); rho values default to those recorded in the header."""
    head, body = container.unpack(blob)
    if rho0 is None and not math.isnan(head.rho0):
        rho0 = head.rho0
    if rho1 is None and not math.isnan(head.rho1):
        rho1 = head.rho1
    try:
        model = CoderModel(d, cfg, rho0, rho1)
    except ValueError as exc:
        raise HeaderMismatchError(f"recorded rho values do not fit this distribution: {exc}") from exc
    container.check_header(head, _header_for(model, head.flags, head.payload_len))
    count = cfg.n
    if head.truncated:
        count, used = container.read_leb128(body)
        body = body[used:]
        if count > cfg.n:
            raise CorruptPayloadError(f"symbol count {count} exceeds n={cfg.n}")
    dec = RangeDecoder(body)
    mirror = RangeEncoder()
    pattern, bins = [], []
    for _ in range(count):
        total = model.total
        t = dec.target(total)
        ev, cum, freq = model.locate(t)
        dec.consume(cum, freq)
        mirror.encode(cum, freq, total)
        model.update(ev)
        if trace is not None:
            trace.append(model.state_digest())
        pattern.append(ev.index)
        bins.append(ev.bin)
    if mirror.finish() != body:
        raise CorruptPayloadError("payload does not re-encode to itself (corrupted or desynchronised)")
    return tuple(pattern), tuple(bins)


def payload_bits(blob: bytes) -> int:
    """Range-coded payload size in bits (header and symbol-count prefix excluded)."""
    head, body = container.unpack(blob)
    if head.truncated:
        _, used = container.read_leb128(body)
        body = body[used:]
    return 8 * len(body)


# --- expected code length -----------------------------------------------------


class _BinCounts:
    """Per-sample occurrence and distinct-letter counts in every occupied bin."""

    def __init__(self, d: Distribution, cfg: AnalysisConfig, samples: int, seed: int):
        st = bin_stats(d, cfg)
        self.active = np.flatnonzero(st.k_b)
        rank = np.searchsorted(self.active, st.letter_bins)
        n, A = cfg.n, self.active.size
        rows = max(1, min(samples, _MC_CHUNK // max(n, A)))
        tot_parts, uniq_parts = [], []
        for c, start in enumerate(range(0, samples, rows)):
            r = min(rows, samples - start)
            rng = np.random.Generator(np.random.PCG64(derive_seed(seed, c)))
            s = np.sort(sample_letters(d, (r, n), rng), axis=1)
            fresh = np.ones_like(s, dtype=bool)
            fresh[:, 1:] = s[:, 1:] != s[:, :-1]
            key = rank[s - 1] + A * np.arange(r)[:, None]
            tot_parts.append(np.bincount(key.ravel(), minlength=r * A).reshape(r, A))
            uniq_parts.append(np.bincount(key[fresh], minlength=r * A).reshape(r, A))
        self.tot = np.concatenate(tot_parts)
        self.uniq = np.concatenate(uniq_parts)

    def bin_cost(self, a: int, phi: float, rho: float) -> np.ndarray:
        """Per-sample bits spent on bin ``active[a]`` for a given repeat probability."""
        u = self.uniq[:, a]
        steps = np.arange(int(u.max()) + 1 if u.size else 1)
        new_cum = np.concatenate(([0.0], np.cumsum(-np.log2(phi - steps[:-1] * rho))))
        return (self.tot[:, a] - u) * -math.log2(rho) + new_cum[u]


def expected_code_length(
    d: Distribution,
    cfg: AnalysisConfig,
    method: str = "exact",
    samples: int = 10_000,
    seed: int = 0,
    rho0: float | None = None,
    rho1: float | None = None,
) -> EntropyEstimate:
    """``E[-log2 Q]`` over length-n sequences: exact enumeration or Monte Carlo."""
    if method == "exact":
        terms = [
            w * ideal_code_length(d, cfg, p, b, rho0, rho1)
            for p, b, w in pattern_bin_masses(d, cfg)
        ]
        return EntropyEstimate(math.fsum(terms), 0.0, "exact_sequences", n=cfg.n, k=d.k)
    if method not in ("monte_carlo", "mc"):
        raise ValueError(f"unknown method {method!r}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    model = CoderModel(d, cfg, rho0, rho1)
    counts = _BinCounts(d, cfg, samples, seed)
    vals = np.zeros(samples)
    for a, b in enumerate(counts.active):
        vals += counts.bin_cost(a, model.phi[int(b)], model.rho[int(b)])
    mean = math.fsum(vals) / samples
    if samples == 1:
        return EntropyEstimate(mean, 0.0, "monte_carlo", 1, cfg.n, d.k, degenerate=True)
    var = math.fsum((vals - mean) ** 2) / (samples - 1)
    return EntropyEstimate(mean, math.sqrt(var / samples), "monte_carlo", samples, cfg.n, d.k)


def rho_grid(limit: float, points: int = 41, span: float = 1e-3) -> np.ndarray:
    """Log-spaced candidates in ``[span * limit, limit]``; the last one is the limit itself."""
    g = limit * np.geomspace(span, 1.0, points)
    g[-1] = limit
    return g


def optimize_rho(
    d: Distribution,
    cfg: AnalysisConfig,
    objective_samples: int = 2000,
    seed: int = 0,
    points: int = 41,
) -> tuple[float, float]:
    """Grid-minimise the Monte Carlo code length over ``rho_0`` and ``rho_1``.

    The code length splits into per-bin sums, so each free parameter is
    optimised on its own over the same samples.  Empty bins give NaN.
    """
    st = bin_stats(d, cfg)
    counts = _BinCounts(d, cfg, objective_samples, seed)
    out = []
    for b in (0, 1):
        if st.k_b[b] == 0:
            out.append(math.nan)
            continue
        phi = float(st.phi_b[b])
        limit = default_rho(phi, int(st.k_b[b]), cfg.n)
        a = int(np.searchsorted(counts.active, b))
        costs = [math.fsum(counts.bin_cost(a, phi, r)) for r in rho_grid(limit, points)]
        out.append(float(rho_grid(limit, points)[int(np.argmin(costs))]))
    return out[0], out[1]
