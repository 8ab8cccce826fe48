"""Fiber maps on the even levels, the Cantor pairing and an enumeration of the rationals above 1.

``tau(2m) = nu_2(m) + 1`` (the 2-adic ruler map), so the fiber over ``n`` is
``{2**n (2i - 1) : i >= 1}``.  ``rho(2m)`` unpairs ``m`` into ``(n, j)`` and
returns ``(n, r_j)``.  Rationals above 1 are ``1 + s`` with ``s`` running through
the Stern-Brocot tree breadth first (heap index ``j``: root 1, children
``2j`` left, ``2j + 1`` right).  Both ``rho`` and the enumeration accept a finite
prefix, which keeps every fiber infinite and the enumeration bijective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import PreconditionError


def pair(x: int, y: int) -> int:
    """Cantor pairing of ``N x N`` onto ``N`` (all indices from 1)."""
    if x < 1 or y < 1:
        raise PreconditionError("pairing is defined on positive integers")
    d = x + y - 2
    return d * (d + 1) // 2 + y


def unpair(z: int) -> tuple:
    """Inverse of :func:`pair`."""
    if z < 1:
        raise PreconditionError("pairing is defined on positive integers")
    d = (math.isqrt(8 * (z - 1) + 1) - 1) // 2
    while d * (d + 1) // 2 >= z:
        d -= 1
    while (d + 1) * (d + 2) // 2 < z:
        d += 1
    y = z - d * (d + 1) // 2
    return d + 2 - y, y


def triple(q: int, j: int, t: int) -> int:
    return pair(q, pair(j, t))


def untriple(z: int) -> tuple:
    q, rest = unpair(z)
    j, t = unpair(rest)
    return q, j, t


def tau(k: int) -> int:
    """``tau(2m) = nu_2(m) + 1``."""
    if k < 2 or k % 2:
        raise PreconditionError("tau is defined on even positive integers")
    m = k // 2
    return (m & -m).bit_length()


def tau_fiber_member(n: int, i: int) -> int:
    """``phi(n, i)``: the ``i``-th smallest level in ``tau^{-1}(n)``."""
    if n < 1 or i < 1:
        raise PreconditionError("fiber indices start at 1")
    return (2 * i - 1) << n


def tau_fiber_position(k: int) -> int:
    """Position of the even level ``k`` inside its fiber."""
    n = tau(k)
    return ((k >> n) + 1) // 2


def _stern_brocot(index: int) -> Fraction:
    """Node ``index`` (heap numbering from 1) of the Stern-Brocot tree."""
    if index < 1:
        raise PreconditionError("heap index starts at 1")
    a, b, c, d = 0, 1, 1, 0  # left bound a/b, right bound c/d
    bits = bin(index)[3:]
    for bit in bits:
        num, den = a + c, b + d
        if bit == "0":
            c, d = num, den
        else:
            a, b = num, den
    return Fraction(a + c, b + d)


def _stern_brocot_index(x: Fraction) -> int:
    """Inverse of :func:`_stern_brocot` for positive rationals.

    The path to ``x = [a0; a1, ..., an]`` is ``R**a0 L**a1 R**a2 ...`` with the
    last run shortened by one, so the index is assembled run by run.
    """
    x = Fraction(x)
    if x <= 0:
        raise PreconditionError("Stern-Brocot tree holds positive rationals")
    quotients = []
    num, den = x.numerator, x.denominator
    while den:
        quotients.append(num // den)
        num, den = den, num % den
    quotients[-1] -= 1
    index = 1
    for pos, count in enumerate(quotients):
        index <<= count
        if pos % 2 == 0:
            index |= (1 << count) - 1
    return index


@dataclass
class RationalEnumeration:
    """``r_1, r_2, ...`` enumerating the rationals above 1, with an optional prefix."""

    prefix: tuple = ()

    def __post_init__(self):
        self.prefix = tuple(Fraction(r) for r in self.prefix)
        if any(r <= 1 for r in self.prefix) or len(set(self.prefix)) != len(self.prefix):
            raise PreconditionError("prefix must list distinct rationals above 1")

    def _skipped_before(self, base_index: int) -> int:
        return sum(1 for r in self.prefix if _stern_brocot_index(r - 1) < base_index)

    def __call__(self, j: int) -> Fraction:
        """``r_j``."""
        if j < 1:
            raise PreconditionError("enumeration starts at 1")
        if j <= len(self.prefix):
            return self.prefix[j - 1]
        target = j - len(self.prefix)
        # walk base indices, skipping values already in the prefix
        skip = sorted(_stern_brocot_index(r - 1) for r in self.prefix)
        base = target
        for s in skip:
            if s <= base:
                base += 1
        return 1 + _stern_brocot(base)

    def index(self, r) -> int:
        """The ``j`` with ``r_j = r``."""
        r = Fraction(r)
        if r <= 1:
            raise PreconditionError("only rationals above 1 are enumerated")
        if r in self.prefix:
            return self.prefix.index(r) + 1
        base = _stern_brocot_index(r - 1)
        return len(self.prefix) + base - self._skipped_before(base)

    def to_json(self):
        return [str(r) for r in self.prefix]


@dataclass
class FiberMap:
    """``tau`` (V1/V2) or ``rho`` (V3) on even levels.

    ``rho_prefix`` fixes ``rho(2), rho(4), ...`` for the first levels; later levels
    follow ``rho(2m) = (n, r_j)`` with ``(n, j) = unpair(m - len(prefix))``.
    """

    kind: str = "tau"
    rho_prefix: tuple = ()
    enumeration: RationalEnumeration = field(default_factory=RationalEnumeration)

    def __post_init__(self):
        if self.kind not in ("tau", "rho"):
            raise PreconditionError(f"unknown fiber kind {self.kind!r}")
        self.rho_prefix = tuple((int(n), Fraction(r)) for n, r in self.rho_prefix)

    def tau(self, k: int) -> int:
        return tau(k)

    def rho(self, k: int) -> tuple:
        if k < 2 or k % 2:
            raise PreconditionError("rho is defined on even positive integers")
        m = k // 2
        if m <= len(self.rho_prefix):
            return self.rho_prefix[m - 1]
        n, j = unpair(m - len(self.rho_prefix))
        return n, self.enumeration(j)

    def size(self, k: int) -> int:
        """Interval size at the even level ``k``: ``tau(k)`` or ``rho_1(k)``."""
        return self.tau(k) if self.kind == "tau" else self.rho(k)[0]

    def fiber_position(self, k: int) -> int:
        """Position ``i`` of the even level ``k`` in its fiber (from 1)."""
        if self.kind == "tau":
            return tau_fiber_position(k)
        target = self.rho(k)
        return sum(1 for kk in range(2, k + 1, 2) if self.rho(kk) == target)

    def fiber_member(self, target, i: int, search_limit: int = 10**6) -> int | None:
        """``phi(n, i)`` or ``phi~(n, r, i)``; ``None`` if not found below the limit."""
        if self.kind == "tau":
            return tau_fiber_member(int(target), i)
        n, r = int(target[0]), Fraction(target[1])
        seen = 0
        for kk in range(2, search_limit + 1, 2):
            if self.rho(kk) == (n, r):
                seen += 1
                if seen == i:
                    return kk
        return None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "rho_prefix": [[str(n), str(r)] for n, r in self.rho_prefix],
            "enumeration_prefix": self.enumeration.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "FiberMap":
        return cls(
            kind=data["kind"],
            rho_prefix=tuple((int(n), Fraction(r)) for n, r in data.get("rho_prefix", [])),
            enumeration=RationalEnumeration(tuple(Fraction(r) for r in data.get("enumeration_prefix", []))),
        )
