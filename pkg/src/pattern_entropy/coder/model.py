"""Sequential probability assignment over (pattern index, eta bin) pairs.

A repeat of an index seen in bin ``b`` costs ``rho_b``; a first occurrence in
bin ``b`` after ``c_b`` distinct indices have already appeared there costs
``phi_b - c_b * rho_b``.  For ``b >= 2`` ``rho_b = phi_b / k_b``; ``rho_0`` and
``rho_1`` are free parameters, defaulting to ``phi_b / min(k_b, n)``.

Within one bin the repeat events all share a probability, so the quantised
coding table is laid out bin by bin as ``[new | repeat_0 | repeat_1 | ...]``
and located with a Fenwick tree over bins.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..distributions import AnalysisConfig, Distribution
from ..grids import bin_stats

FREQ_BITS = 62
FREQ_TOTAL = 1 << FREQ_BITS

NEW = "new"
REPEAT = "repeat"


@dataclass(frozen=True)
class Event:
    kind: str  # NEW or REPEAT
    bin: int
    index: int  # pattern index (1-based); for NEW, the index it will receive


def default_rho(phi: float, k_b: int, n: int) -> float:
    return phi / min(k_b, n)


class CoderModel:
    """Mutable coder state for one pass over a (pattern, bin) sequence."""

    def __init__(
        self,
        d: Distribution,
        cfg: AnalysisConfig,
        rho0: float | None = None,
        rho1: float | None = None,
    ):
        st = bin_stats(d, cfg)
        self.d = d
        self.cfg = cfg
        self.stats = st
        n = cfg.n
        self.active = [int(b) for b in np.flatnonzero(st.k_b)]
        self.pos = {b: i for i, b in enumerate(self.active)}
        self.phi = {b: float(st.phi_b[b]) for b in self.active}
        self.k_b = {b: int(st.k_b[b]) for b in self.active}
        self.rho = {}
        for b in self.active:
            cap = min(self.k_b[b], n)
            limit = self.phi[b] / cap
            given = rho0 if b == 0 else rho1 if b == 1 else None
            if given is None or (isinstance(given, float) and math.isnan(given)):
                r = self.phi[b] / self.k_b[b] if b >= 2 else limit
            else:
                r = float(given)
                if not 0 < r <= limit * (1 + 1e-12):
                    raise ValueError(
                        f"rho_{b}={r!r} outside (0, phi_b/min(k_b, n)] = (0, {limit!r}]"
                    )
                r = min(r, limit)
            self.rho[b] = r
        self.rho0 = self.rho.get(0, math.nan)
        self.rho1 = self.rho.get(1, math.nan)
        self._init_quantised()
        self.reset()

    # ---- state ---------------------------------------------------------------

    def reset(self) -> None:
        self.j = 0
        self.c = {b: 0 for b in self.active}
        self.index_bin: list[int] = []  # index_bin[i - 1] = bin of pattern index i
        self.members = {b: [] for b in self.active}  # indices in order of first occurrence
        self.rank_in_bin: list[int] = []
        self._tree = _Fenwick([self.F[b] for b in self.active])

    def can_open(self, b: int) -> bool:
        return self.c[b] < self.k_b[b]

    def prob(self, ev: Event) -> float:
        if ev.kind == REPEAT:
            return self.rho[ev.bin]
        return self.phi[ev.bin] - self.c[ev.bin] * self.rho[ev.bin]

    def next_event_distribution(self) -> list[tuple[Event, float]]:
        if self.j >= self.cfg.n:
            raise ValueError("model already consumed n symbols")
        m = len(self.index_bin)
        out = []
        for i, b in enumerate(self.index_bin, start=1):
            out.append((Event(REPEAT, b, i), self.rho[b]))
        for b in self.active:
            if self.can_open(b):
                p = self.phi[b] - self.c[b] * self.rho[b]
                if p > 0:
                    out.append((Event(NEW, b, m + 1), p))
                elif self.c[b] < min(self.k_b[b], self.cfg.n):
                    raise RuntimeError(f"new-symbol probability in bin {b} is {p!r}")
        return out

    def event_for(self, psi: int, beta: int) -> Event:
        """Translate a (pattern index, bin) pair into a model event, validating it."""
        m = len(self.index_bin)
        if 1 <= psi <= m:
            if self.index_bin[psi - 1] != beta:
                raise ValueError(
                    f"index {psi} first occurred with bin {self.index_bin[psi - 1]}, not {beta}"
                )
            return Event(REPEAT, beta, psi)
        if psi != m + 1:
            raise ValueError(f"pattern index {psi} at step {self.j + 1} breaks first-occurrence order")
        if beta not in self.c:
            raise ValueError(f"bin {beta} holds no letters")
        if not self.can_open(beta):
            raise ValueError(f"bin {beta} already has all {self.k_b[beta]} letters in use")
        return Event(NEW, beta, psi)

    def update(self, ev: Event) -> None:
        self.j += 1
        if ev.kind == REPEAT:
            return
        b = ev.bin
        self.index_bin.append(b)
        self.rank_in_bin.append(self.c[b])
        self.members[b].append(ev.index)
        self.c[b] += 1
        if not self.can_open(b):
            # the new slot disappears; the group keeps only its repeat slots
            self._tree.add(self.pos[b], self.c[b] * self.R[b] - self.F[b])

    # ---- quantised coding table -------------------------------------------------

    def _init_quantised(self) -> None:
        n = self.cfg.n
        self.F, self.R = {}, {}
        for b in self.active:
            cap = min(self.k_b[b], n)
            F = int(self.phi[b] * FREQ_TOTAL)
            R = min(int(self.rho[b] * FREQ_TOTAL), F // cap)
            R = max(R, 1)
            self.F[b] = max(F, cap * R)
            self.R[b] = R

    def _group(self, b: int) -> tuple[int, int]:
        """(size of the new slot, cumulative start of bin ``b``)."""
        f_new = self.F[b] - self.c[b] * self.R[b] if self.can_open(b) else 0
        return f_new, self._tree.prefix(self.pos[b])

    def quantised(self, ev: Event) -> tuple[int, int, int]:
        """``(cum, freq, total)`` of an event in the current quantised table."""
        f_new, start = self._group(ev.bin)
        total = self._tree.total
        if ev.kind == NEW:
            return start, f_new, total
        rank = self.rank_in_bin[ev.index - 1]
        return start + f_new + rank * self.R[ev.bin], self.R[ev.bin], total

    def state_digest(self) -> int:
        """Compact fingerprint of the mutable state, for step-by-step comparisons."""
        return hash((self.j, self._tree.total, tuple(self.c.values()), len(self.index_bin)))

    @property
    def total(self) -> int:
        return self._tree.total

    def locate(self, target: int) -> tuple[Event, int, int]:
        """Event whose quantised slot contains ``target``; returns ``(event, cum, freq)``."""
        slot, start = self._tree.find(target)
        b = self.active[slot]
        f_new = self.F[b] - self.c[b] * self.R[b] if self.can_open(b) else 0
        off = target - start
        if off < f_new:
            return Event(NEW, b, len(self.index_bin) + 1), start, f_new
        r = (off - f_new) // self.R[b]
        if r >= self.c[b]:
            raise ValueError("target falls outside the occupied slots")
        return Event(REPEAT, b, self.members[b][r]), start + f_new + r * self.R[b], self.R[b]


class _Fenwick:
    def __init__(self, values: Sequence[int]):
        self.n = len(values)
        self.tree = [0] * (self.n + 1)
        self.total = 0
        for i, v in enumerate(values):
            self.add(i, v)
        self._top = 1 << max(0, self.n.bit_length() - 1) if self.n else 0

    def add(self, i: int, delta: int) -> None:
        self.total += delta
        i += 1
        while i <= self.n:
            self.tree[i] += delta
            i += i & -i

    def prefix(self, i: int) -> int:
        """Sum of entries ``[0, i)``."""
        s = 0
        while i > 0:
            s += self.tree[i]
            i -= i & -i
        return s

    def find(self, target: int) -> tuple[int, int]:
        """Largest ``i`` with ``prefix(i) <= target``, plus that prefix."""
        pos, acc = 0, 0
        step = self._top
        while step:
            nxt = pos + step
            if nxt <= self.n and acc + self.tree[nxt] <= target:
                pos = nxt
                acc += self.tree[nxt]
            step >>= 1
        return pos, acc
