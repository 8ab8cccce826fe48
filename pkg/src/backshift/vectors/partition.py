"""Partitions of the fiber positions into infinite parts.

``single``: ``A_q = {pair(q, t) : t >= 1}`` (V1/V2).
``double``: ``A_r^q = {triple(q, j, t) : t >= 1}`` with ``r = r_j`` (V3).
The rank of a member inside its part is ``t - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..construct.fibers import RationalEnumeration, pair, triple, unpair, untriple
from ..errors import NotInPart, PreconditionError


@dataclass(frozen=True)
class PartitionMap:
    kind: str = "single"
    enumeration: RationalEnumeration | None = None

    def __post_init__(self):
        if self.kind not in ("single", "double"):
            raise PreconditionError(f"unknown partition kind {self.kind!r}")
        if self.kind == "double" and self.enumeration is None:
            object.__setattr__(self, "enumeration", RationalEnumeration())

    def part_of(self, i: int):
        """``q`` for ``single``, ``(q, r)`` for ``double``."""
        if self.kind == "single":
            return unpair(i)[0]
        q, j, _ = untriple(i)
        return q, self.enumeration(j)

    def rank(self, i: int) -> int:
        """Position of ``i`` inside its part, from 0."""
        if self.kind == "single":
            return unpair(i)[1] - 1
        return untriple(i)[2] - 1

    def member(self, part, rank: int) -> int:
        """The member of ``part`` with the given rank."""
        if rank < 0:
            raise PreconditionError("ranks start at 0")
        if self.kind == "single":
            return pair(int(part), rank + 1)
        q, r = part
        return triple(int(q), self.enumeration.index(Fraction(r)), rank + 1)

    def members(self, part, count: int) -> list:
        return [self.member(part, t) for t in range(count)]

    def contains(self, part, i: int) -> bool:
        if self.kind == "single":
            return self.part_of(i) == int(part)
        q, r = part
        return self.part_of(i) == (int(q), Fraction(r))

    def rank_in(self, part, i: int) -> int:
        """Rank of ``i`` inside ``part``; ``NotInPart`` otherwise."""
        if not self.contains(part, i):
            raise NotInPart(f"{i} is not in part {part}")
        return self.rank(i)
