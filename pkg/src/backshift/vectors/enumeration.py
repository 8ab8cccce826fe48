"""A fixed enumeration of the rational points of the open unit ball of ``l_p^n``.

Order: by total height, where a rational ``a/b`` in lowest terms has height
``|a| + b`` and a tuple's height is the sum over its real (and, for complex
tuples, imaginary) parts.  Within a height the height profile runs through the
compositions of the total in lexicographic order, and each slot lists its
rationals as ``0`` (height 1) or ``1/(h-1), -1/(h-1), 2/(h-2), -2/(h-2), ...``.
A tuple is kept when ``sum |alpha_j|**p < 1`` and its last entry is nonzero.
For ``n = 1`` the first point is ``1/2``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import product

import mpmath

from ..errors import PreconditionError

MARGIN = 1e-12


@lru_cache(maxsize=None)
def rationals_of_height(h: int) -> tuple:
    """All rationals ``a/b`` in lowest terms with ``|a| + b = h``."""
    if h < 1:
        return ()
    if h == 1:
        return (Fraction(0),)
    out = []
    for a in range(1, h):
        b = h - a
        if math.gcd(a, b) == 1:
            out.append(Fraction(a, b))
            out.append(Fraction(-a, b))
    return tuple(out)


def _compositions(total: int, parts: int):
    """Compositions of ``total`` into ``parts`` positive summands, lexicographically."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _abs_power(value, p: Fraction):
    """``|value|**p`` exactly when possible, else ``None``."""
    if isinstance(value, tuple):
        sq = value[0] ** 2 + value[1] ** 2
        if p.denominator == 1 and p.numerator % 2 == 0:
            return sq ** (p.numerator // 2)
        return None
    if p.denominator == 1:
        return abs(value) ** p.numerator
    return None


def _inside_ball(entries, p: Fraction) -> bool | None:
    """Exact test of ``sum |alpha|**p < 1``; ``None`` inside the float margin."""
    exact = [_abs_power(v, p) for v in entries]
    if all(e is not None for e in exact):
        return sum(exact) < 1
    with mpmath.workprec(80):
        p_mp = mpmath.mpf(p.numerator) / p.denominator
        total = mpmath.mpf(0)
        for v in entries:
            if isinstance(v, tuple):
                mod = mpmath.sqrt(mpmath.mpf(v[0].numerator) ** 2 / v[0].denominator**2 + mpmath.mpf(v[1].numerator) ** 2 / v[1].denominator**2)
            else:
                mod = abs(mpmath.mpf(v.numerator) / v.denominator)
            total += mod**p_mp
        if abs(total - 1) <= MARGIN:
            return None
        return bool(total < 1)


class RationalBallEnumerator:
    """The points of ``D_n`` (rational entries, inside the unit ball, last entry nonzero) in a fixed order."""

    def __init__(self, n: int, p=2, field: str = "real"):
        if n < 1:
            raise PreconditionError("dimension must be positive")
        if field not in ("real", "complex"):
            raise PreconditionError(f"unknown field {field!r}")
        self.n = n
        self.p = Fraction(p)
        self.field = field
        self._cache = []
        self._where = {}
        self._source = self._generate()

    def _generate(self):
        slots = self.n if self.field == "real" else 2 * self.n
        total = slots
        while True:
            for profile in _compositions(total, slots):
                for parts in product(*(rationals_of_height(h) for h in profile)):
                    if self.field == "real":
                        entries = tuple(parts)
                        last_zero = entries[-1] == 0
                    else:
                        entries = tuple((parts[2 * t], parts[2 * t + 1]) for t in range(self.n))
                        last_zero = entries[-1] == (0, 0)
                    if last_zero:
                        continue
                    if _inside_ball(entries, self.p):
                        yield entries
            total += 1

    def _extend_to(self, i: int):
        while len(self._cache) <= i:
            entry = next(self._source)
            self._where[entry] = len(self._cache)
            self._cache.append(entry)

    def __getitem__(self, i: int) -> tuple:
        if i < 0:
            raise IndexError(i)
        self._extend_to(i)
        return self._cache[i]

    def index(self, entries, max_rank: int = 10**6) -> int:
        """Rank of a tuple in the enumeration (searching at most ``max_rank`` entries)."""
        entries = tuple(entries)
        while entries not in self._where:
            if len(self._cache) >= max_rank:
                raise PreconditionError("tuple not found in the enumerated range")
            self._extend_to(len(self._cache))
        return self._where[entries]

    def as_scalars(self, entries) -> list:
        """Entries as mpf/mpc values."""
        if self.field == "real":
            return [mpmath.mpf(v.numerator) / v.denominator for v in entries]
        return [mpmath.mpc(mpmath.mpf(a.numerator) / a.denominator, mpmath.mpf(b.numerator) / b.denominator) for a, b in entries]


def enumerate_ball(e: RationalBallEnumerator, i: int) -> tuple:
    """The ``i``-th tuple (from 0) of the enumeration."""
    return e[i]
