"""Finitely supported vectors of ``l_p`` over the reals or the complex numbers.

Entries are mpmath numbers at the working precision (53 bits by default).
Coefficients such as ``4**-7000`` occur routinely in the constructions and
would underflow IEEE doubles, while mpf values carry an unbounded exponent.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath

from ..errors import ShapeError

FIELDS = ("real", "complex")


def to_scalar(value, field: str = "real"):
    """Convert ints, floats, Fractions, complex numbers or strings to mpf/mpc."""
    if isinstance(value, Fraction):
        value = mpmath.mpf(value.numerator) / value.denominator
    elif isinstance(value, tuple) and len(value) == 2:
        re, im = (to_scalar(v) for v in value)
        value = mpmath.mpc(re, im)
    if field == "complex":
        return mpmath.mpc(value)
    if isinstance(value, (complex, mpmath.mpc)):
        if mpmath.im(value) != 0:
            raise ShapeError("complex entry in a real vector")
        value = mpmath.re(value)
    return mpmath.mpf(value)


def _abs_pow(x, p):
    a = abs(x)
    if p == 2:
        return a * a
    if p == 1:
        return a
    return mpmath.power(a, p)


def _p_value(p):
    p = Fraction(p)
    return p.numerator if p.denominator == 1 else mpmath.mpf(p.numerator) / p.denominator


class SparseVector:
    """A finitely supported element of ``l_p``: a map index -> nonzero scalar."""

    __slots__ = ("field", "p", "entries")

    def __init__(self, entries=None, p=2, field: str = "real"):
        if field not in FIELDS:
            raise ShapeError(f"unknown field {field!r}")
        if Fraction(p) < 1:
            raise ShapeError("p must be at least 1")
        self.field = field
        self.p = Fraction(p)
        clean = {}
        for k, v in (entries or {}).items():
            k = int(k)
            if k < 1:
                raise ShapeError("coordinates are indexed from 1")
            s = to_scalar(v, field)
            if s != 0:
                clean[k] = s
        self.entries = clean

    @classmethod
    def unit(cls, k: int, p=2, field: str = "real") -> "SparseVector":
        """The canonical basis vector ``e_k``."""
        return cls({k: 1}, p, field)

    @classmethod
    def zero(cls, p=2, field: str = "real") -> "SparseVector":
        return cls({}, p, field)

    @classmethod
    def _raw(cls, entries: dict, p, field: str) -> "SparseVector":
        out = cls.__new__(cls)
        out.field = field
        out.p = Fraction(p)
        out.entries = {k: v for k, v in entries.items() if v != 0}
        return out

    @property
    def support(self) -> list:
        return sorted(self.entries)

    def coordinate(self, k: int):
        return self.entries.get(k, to_scalar(0, self.field))

    def power_sum_mp(self):
        """``sum |x_k|**p`` as an mpf."""
        p = _p_value(self.p)
        return mpmath.fsum(_abs_pow(v, p) for v in self.entries.values())

    def p_norm_mp(self):
        total = self.power_sum_mp()
        if total == 0:
            return mpmath.mpf(0)
        p = _p_value(self.p)
        return mpmath.root(total, p) if isinstance(p, int) else mpmath.power(total, 1 / p)

    def p_norm(self) -> float:
        return float(self.p_norm_mp())

    def _check(self, other: "SparseVector"):
        if self.p != other.p:
            raise ShapeError(f"mixed exponents {self.p} and {other.p}")
        if self.field != other.field:
            raise ShapeError("mixed scalar fields")

    def __add__(self, other: "SparseVector") -> "SparseVector":
        self._check(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0) + v
        return SparseVector._raw(out, self.p, self.field)

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        return self + other.scale(-1)

    def scale(self, alpha) -> "SparseVector":
        a = to_scalar(alpha, self.field)
        return SparseVector._raw({k: a * v for k, v in self.entries.items()}, self.p, self.field)

    def __mul__(self, alpha) -> "SparseVector":
        return self.scale(alpha)

    __rmul__ = __mul__

    def __neg__(self) -> "SparseVector":
        return self.scale(-1)

    def restrict(self, lo: int, hi: int) -> "SparseVector":
        return SparseVector._raw({k: v for k, v in self.entries.items() if lo <= k <= hi}, self.p, self.field)

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseVector)
            and self.p == other.p
            and self.field == other.field
            and self.entries == other.entries
        )

    def __repr__(self):
        head = ", ".join(f"{k}: {mpmath.nstr(v, 6)}" for k, v in sorted(self.entries.items())[:6])
        more = ", ..." if len(self.entries) > 6 else ""
        return f"SparseVector(p={self.p}, field={self.field}, {{{head}{more}}})"

    def to_json(self) -> dict:
        """``{p, field, entries: [[index, re, im]]}`` with decimal strings."""
        rows = []
        for k in sorted(self.entries):
            v = self.entries[k]
            rows.append([str(k), mpmath.nstr(mpmath.re(v), 17), mpmath.nstr(mpmath.im(v), 17)])
        return {"p": str(self.p), "field": self.field, "entries": rows}

    @classmethod
    def from_json(cls, data: dict) -> "SparseVector":
        field = data["field"]
        entries = {}
        for idx, re, im in data["entries"]:
            value = mpmath.mpc(mpmath.mpf(re), mpmath.mpf(im)) if field == "complex" else mpmath.mpf(re)
            entries[int(idx)] = value
        return cls(entries, Fraction(data["p"]), field)


def p_norm(x: SparseVector) -> float:
    """``||x||_p`` from the stored entries."""
    return x.p_norm()


def coordinate(x: SparseVector, k: int):
    """``pi_k(x)``; zero off the support."""
    return x.coordinate(k)
