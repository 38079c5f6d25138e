"""Patterns: restricted-growth strings obtained by first-occurrence relabelling.

A pattern is represented everywhere as a tuple of positive ints, e.g. the
pattern of ``"lossless"`` is ``(1, 2, 3, 3, 1, 4, 3, 3)``.
"""
from __future__ import annotations

from collections import Counter
from typing import Hashable, Iterable, Iterator, Sequence

from .errors import InfeasibleError

Pattern = tuple[int, ...]

DEFAULT_ENUMERATION_CAP = 14


def extract_pattern(sequence: Iterable[Hashable]) -> Pattern:
    """Replace every symbol by the 1-based rank of its first occurrence."""
    index: dict[Hashable, int] = {}
    out = []
    for s in sequence:
        i = index.get(s)
        if i is None:
            i = index[s] = len(index) + 1
        out.append(i)
    return tuple(out)


def is_valid_pattern(seq: Sequence[int]) -> bool:
    top = 0
    for v in seq:
        if isinstance(v, bool) or not isinstance(v, int):
            return False
        if v < 1 or v > top + 1:
            return False
        top = max(top, v)
    return True


def multiplicities(p: Sequence[int]) -> list[int]:
    """Occurrence count of index ``i + 1`` at position ``i``."""
    counts = Counter(p)
    return [counts[i] for i in range(1, len(counts) + 1)]


def bell_number(n: int) -> int:
    """Bell number via the Bell triangle."""
    if n < 0:
        raise ValueError("n must be non-negative")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def pattern_prefixes(n: int, depth: int) -> list[Pattern]:
    """All valid prefixes of length ``min(depth, n)``, in lexicographic order.

    Feeding each prefix to :func:`enumerate_patterns` partitions the full
    enumeration into disjoint, ordered chunks.
    """
    depth = min(depth, n)
    return list(_rgs(depth, ()))


def enumerate_patterns(
    n: int, prefix: Sequence[int] = (), cap: int | None = DEFAULT_ENUMERATION_CAP
) -> Iterator[Pattern]:
    """Yield every length-``n`` pattern (extending ``prefix``) in lexicographic order.

    Raises :class:`InfeasibleError` when ``n`` exceeds ``cap``; the number of
    patterns is the Bell number of ``n``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if cap is not None and n > cap:
        raise InfeasibleError(
            f"enumeration infeasible: n={n} exceeds cap {cap} "
            f"(Bell({n}) = {bell_number(n)} patterns)"
        )
    prefix = tuple(prefix)
    if len(prefix) > n or not is_valid_pattern(prefix):
        raise ValueError(f"invalid prefix {prefix!r} for n={n}")
    return _rgs(n, prefix)


def _rgs(n: int, prefix: Pattern) -> Iterator[Pattern]:
    if n == 0:
        yield ()
        return
    a = list(prefix) + [1] * (n - len(prefix))
    fixed = len(prefix)
    # running maxima of a[:j]
    top = [0] * (n + 1)
    for j in range(n):
        top[j + 1] = max(top[j], a[j])
    while True:
        yield tuple(a)
        # rightmost free position that can still grow
        j = n - 1
        while j >= max(fixed, 1) and a[j] > top[j]:
            j -= 1
        if j < max(fixed, 1):
            return
        a[j] += 1
        top[j + 1] = max(top[j], a[j])
        for t in range(j + 1, n):
            a[t] = 1
            top[t + 1] = top[t]


def format_pattern(p: Sequence[int]) -> str:
    return " ".join(str(v) for v in p)


def parse_patterns(text: str) -> list[Pattern]:
    """Parse whitespace-separated integers, one pattern per line."""
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        p = tuple(int(t) for t in line.split())
        if not is_valid_pattern(p):
            raise ValueError(f"not a valid pattern: {line!r}")
        out.append(p)
    return out
