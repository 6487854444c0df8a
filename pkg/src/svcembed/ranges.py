"""Allocation ranges: sets of offerable VM counts stored as merged intervals.

Equivalent to a bit vector whose (i+1)-th bit says whether a subtree can
offer exactly i VMs, but kept as disjoint integer intervals so that the
Minkowski sums used when aggregating child subtrees stay near-linear in the
number of sections.
"""

from __future__ import annotations

from typing import Iterable, Iterator


def _normalize(intervals: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    """Sort, drop empties, merge overlapping or adjacent sections."""
    items = sorted((lo, hi) for lo, hi in intervals if lo <= hi)
    merged: list[tuple[int, int]] = []
    for lo, hi in items:
        if merged and lo <= merged[-1][1] + 1:
            prev_lo, prev_hi = merged[-1]
            merged[-1] = (prev_lo, max(prev_hi, hi))
        else:
            merged.append((lo, hi))
    return tuple(merged)


class AllocationRange:
    """Immutable by convention; construct through the factories so the
    sorted/merged normal form holds."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: tuple[tuple[int, int], ...] = ()):
        self.intervals = intervals

    def __eq__(self, other) -> bool:
        if not isinstance(other, AllocationRange):
            return NotImplemented
        return self.intervals == other.intervals

    def __hash__(self) -> int:
        return hash(self.intervals)

    def __repr__(self) -> str:
        return f"AllocationRange({self.intervals!r})"

    @classmethod
    def from_intervals(cls, intervals: Iterable[tuple[int, int]]) -> "AllocationRange":
        return cls(_normalize(intervals))

    @classmethod
    def span(cls, lo: int, hi: int) -> "AllocationRange":
        if hi < lo:
            return cls(())
        return cls(((lo, hi),))

    @classmethod
    def zero(cls) -> "AllocationRange":
        return cls(((0, 0),))

    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, value: int) -> bool:
        for lo, hi in self.intervals:
            if lo <= value <= hi:
                return True
            if value < lo:
                return False
        return False

    def max_value(self) -> int | None:
        if not self.intervals:
            return None
        return self.intervals[-1][1]

    def values(self) -> Iterator[int]:
        for lo, hi in self.intervals:
            yield from range(lo, hi + 1)

    def minkowski_sum(self, other: "AllocationRange") -> "AllocationRange":
        """All pairwise sums a + b with a in self, b in other."""
        a, b = self.intervals, other.intervals
        if len(a) == 1 and len(b) == 1:
            return AllocationRange(((a[0][0] + b[0][0], a[0][1] + b[0][1]),))
        sums = [(lo1 + lo2, hi1 + hi2) for lo1, hi1 in a for lo2, hi2 in b]
        return AllocationRange(_normalize(sums))

    def clip(self, lo: int, hi: int) -> "AllocationRange":
        a = self.intervals
        if len(a) == 1:
            a2, b2 = a[0][0] if a[0][0] > lo else lo, a[0][1] if a[0][1] < hi else hi
            return AllocationRange(((a2, b2),) if a2 <= b2 else ())
        out = []
        for a0, b0 in a:
            a2, b2 = max(a0, lo), min(b0, hi)
            if a2 <= b2:
                out.append((a2, b2))
        return AllocationRange(tuple(out))

    def intersect(self, other: "AllocationRange") -> "AllocationRange":
        a, b = self.intervals, other.intervals
        if len(a) == 1 and len(b) == 1:
            lo = max(a[0][0], b[0][0])
            hi = min(a[0][1], b[0][1])
            return AllocationRange(((lo, hi),) if lo <= hi else ())
        out = []
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return AllocationRange(tuple(out))

    def largest_at_most(self, limit: int) -> int | None:
        """Largest member <= limit, or None."""
        best = None
        for lo, hi in self.intervals:
            if lo > limit:
                break
            best = min(hi, limit)
        return best
