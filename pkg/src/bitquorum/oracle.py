"""Brute-force reference semantics for threshold and symmetric queries.

Everything here works on plain position sets and row tuples, never on
the bitmap types, so it stays independent of the code it is used to
check.  Speed is a non-goal.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InputError


@dataclass(frozen=True)
class SymmetricSpec:
    """A symmetric Boolean function of ``arity`` inputs.

    ``accept[k]`` is the output when exactly ``k`` of the inputs are 1.
    """

    accept: tuple[bool, ...]

    def __post_init__(self):
        if len(self.accept) < 1:
            raise InputError("accept vector must have length arity + 1")

    @property
    def arity(self) -> int:
        return len(self.accept) - 1

    @classmethod
    def threshold(cls, n: int, t: int) -> "SymmetricSpec":
        if not 1 <= t <= n:
            raise InputError(f"threshold {t} outside [1, {n}]")
        return cls(tuple(k >= t for k in range(n + 1)))

    @classmethod
    def delta(cls, n: int, t: int) -> "SymmetricSpec":
        if not 0 <= t <= n:
            raise InputError(f"delta point {t} outside [0, {n}]")
        return cls(tuple(k == t for k in range(n + 1)))

    @classmethod
    def interval(cls, n: int, lo: int, hi: int) -> "SymmetricSpec":
        return cls(tuple(lo <= k <= hi for k in range(n + 1)))

    @classmethod
    def parity(cls, n: int) -> "SymmetricSpec":
        """Odd Hamming weight, i.e. a wide XOR."""
        return cls(tuple(k % 2 == 1 for k in range(n + 1)))


def brute_threshold(position_sets: Sequence[Iterable[int]], t: int) -> list[int]:
    """Positions occurring in at least ``t`` of the given sets, ascending."""
    n = len(position_sets)
    if not 1 <= t <= n:
        raise InputError(f"threshold {t} outside [1, {n}]")
    counts: Counter[int] = Counter()
    for s in position_sets:
        for p in s:
            counts[p] += 1
    return sorted(p for p, c in counts.items() if c >= t)


def brute_symmetric(position_sets: Sequence[Iterable[int]], spec: SymmetricSpec,
                    universe: int) -> list[int]:
    """Positions ``p`` in ``[0, universe)`` with ``accept[count(p)]`` true."""
    if spec.arity != len(position_sets):
        raise InputError(f"spec arity {spec.arity} != {len(position_sets)} inputs")
    counts: Counter[int] = Counter()
    for s in position_sets:
        for p in s:
            counts[p] += 1
    accept = spec.accept
    if accept[0]:
        return [p for p in range(universe) if accept[counts.get(p, 0)]]
    return sorted(p for p, c in counts.items() if accept[c])


@dataclass
class RowTable:
    """Rectangular table of small integer attribute codes."""

    rows: list[tuple[int, ...]]

    def __post_init__(self):
        if self.rows:
            d = len(self.rows[0])
            if any(len(row) != d for row in self.rows):
                raise InputError("rows must all have the same attribute count")

    @property
    def attribute_count(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def column_values(self, attribute: int) -> set[int]:
        return {row[attribute] for row in self.rows}


def rowscan(table: RowTable, criteria: Sequence[tuple[int, int]], t: int) -> list[int]:
    """Scan the table row by row, returning ids matching >= ``t`` criteria."""
    d = table.attribute_count
    seen = set()
    for attribute, _ in criteria:
        if not 0 <= attribute < d:
            raise InputError(f"unknown attribute {attribute}")
        if attribute in seen:
            raise InputError(f"duplicate attribute {attribute} in criteria")
        seen.add(attribute)
    matches = []
    for rid, row in enumerate(table.rows):
        c = 0
        for attribute, value in criteria:
            if row[attribute] == value:
                c += 1
        if c >= t:
            matches.append(rid)
    return matches
