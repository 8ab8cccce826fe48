"""Integer intervals and lazily represented subsets of the nonnegative integers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

from ..errors import BoundExceeded, PreconditionError


@dataclass(frozen=True, order=False)
class IntegerInterval:
    """The interval ``[lo, hi]`` of positive integers."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 1 or self.hi < self.lo:
            raise PreconditionError(f"invalid interval [{self.lo}, {self.hi}]")

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def translate(self, t: int) -> "IntegerInterval":
        return IntegerInterval(self.lo + t, self.hi + t)

    def __contains__(self, n: int) -> bool:
        return self.lo <= n <= self.hi

    def precedes(self, other: "IntegerInterval") -> bool:
        """``self < other``: every element of ``self`` is left of ``other``."""
        return self.hi < other.lo

    def disjoint(self, other: "IntegerInterval") -> bool:
        return self.hi < other.lo or other.hi < self.lo

    def to_list(self) -> list:
        return [str(self.lo), str(self.hi)]

    @classmethod
    def from_list(cls, pair) -> "IntegerInterval":
        return cls(int(pair[0]), int(pair[1]))

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class IntervalProgression:
    """``count`` translates ``first + u*step`` (``u = 0..count-1``) of one interval."""

    first: IntegerInterval
    step: int
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise PreconditionError("progression needs at least one interval")
        if self.count > 1 and self.step < self.first.size:
            raise PreconditionError("progression intervals would overlap")

    def interval(self, u: int) -> IntegerInterval:
        """The ``u``-th interval, ``u`` counted from 0."""
        if not 0 <= u < self.count:
            raise IndexError(u)
        return self.first.translate(u * self.step)

    @property
    def last(self) -> IntegerInterval:
        return self.interval(self.count - 1)

    @property
    def lo(self) -> int:
        return self.first.lo

    @property
    def hi(self) -> int:
        return self.last.hi

    def __iter__(self) -> Iterator[IntegerInterval]:
        for u in range(self.count):
            yield self.interval(u)

    def __contains__(self, n: int) -> bool:
        if n < self.first.lo or n > self.hi:
            return False
        if self.count == 1:
            return True
        u = (n - self.first.lo) // self.step
        return u < self.count and n <= self.first.hi + u * self.step

    def count_upto(self, n: int) -> int:
        """``|progression ∩ [0, n]|`` in closed form."""
        a, b = self.first.lo, self.first.hi
        if n < a:
            return 0
        size = self.first.size
        if self.count == 1:
            return min(n, b) - a + 1
        full = min(self.count, (n - b) // self.step + 1) if n >= b else 0
        total = full * size
        if full < self.count:
            start = a + full * self.step
            if n >= start:
                total += min(n, start + size - 1) - start + 1
        return total

    def total(self) -> int:
        return self.count * self.first.size


class IndexSet:
    """A subset of the nonnegative integers with membership decidable up to ``bound``.

    Representations: an explicit sorted list, a union of interval
    progressions, a predicate, or the complement of another index set.
    """

    def __init__(self, kind: str, data, bound: int):
        self.kind = kind
        self.data = data
        self.bound = bound

    @classmethod
    def from_list(cls, values: Iterable[int], bound: int | None = None) -> "IndexSet":
        vals = sorted(set(int(v) for v in values))
        if any(v < 0 for v in vals):
            raise PreconditionError("index sets live in the nonnegative integers")
        if bound is None:
            bound = vals[-1] if vals else 0
        return cls("list", vals, bound)

    @classmethod
    def from_intervals(cls, intervals: Iterable[IntegerInterval], bound: int | None = None) -> "IndexSet":
        progs = [IntervalProgression(iv, iv.size, 1) for iv in intervals]
        return cls.from_progressions(progs, bound)

    @classmethod
    def from_progressions(cls, progressions: Iterable[IntervalProgression], bound: int | None = None) -> "IndexSet":
        progs = sorted(progressions, key=lambda pr: pr.lo)
        for left, right in zip(progs, progs[1:]):
            if left.hi >= right.lo:
                raise PreconditionError("progressions must be disjoint and ordered")
        if bound is None:
            bound = progs[-1].hi if progs else 0
        return cls("progressions", progs, bound)

    @classmethod
    def from_predicate(cls, predicate: Callable[[int], bool], bound: int) -> "IndexSet":
        return cls("predicate", predicate, bound)

    def complement(self) -> "IndexSet":
        """``N_0`` minus this set, with the same enumeration bound."""
        return IndexSet("complement", self, self.bound)

    def _check(self, n: int):
        if n > self.bound:
            raise BoundExceeded(f"{n} exceeds enumeration bound {self.bound}")

    def __contains__(self, n: int) -> bool:
        self._check(n)
        return self._contains(n)

    def _contains(self, n: int) -> bool:
        if self.kind == "list":
            from bisect import bisect_left

            i = bisect_left(self.data, n)
            return i < len(self.data) and self.data[i] == n
        if self.kind == "progressions":
            return any(n in pr for pr in self.data)
        if self.kind == "predicate":
            return bool(self.data(n))
        return not self.data._contains(n)

    def count_upto(self, n: int) -> int:
        """``|A ∩ [0, n]|``; raises :class:`BoundExceeded` past the bound."""
        self._check(n)
        return self._count(n)

    def _count(self, n: int) -> int:
        if n < 0:
            return 0
        if self.kind == "list":
            from bisect import bisect_right

            return bisect_right(self.data, n)
        if self.kind == "progressions":
            return sum(pr.count_upto(n) for pr in self.data)
        if self.kind == "predicate":
            return sum(1 for k in range(n + 1) if self.data(k))
        return (n + 1) - self.data._count(n)

    def members_upto(self, n: int) -> Iterator[int]:
        """Members in increasing order up to ``n`` (explicit iteration)."""
        self._check(n)
        if self.kind == "list":
            for v in self.data:
                if v > n:
                    break
                yield v
        elif self.kind == "progressions":
            for pr in self.data:
                for iv in pr:
                    if iv.lo > n:
                        return
                    yield from range(iv.lo, min(iv.hi, n) + 1)
        else:
            for k in range(n + 1):
                if self._contains(k):
                    yield k

    def __repr__(self):
        return f"IndexSet(kind={self.kind!r}, bound={self.bound})"
