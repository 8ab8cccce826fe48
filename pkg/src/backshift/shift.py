"""The weighted backward shift and block vectors, with closed-form powers.

``pi_k(B^m x) = (omega_k ... omega_{k+m-1}) * pi_{k+m}(x)``, so a power of the
shift only needs one weight product per support element and ``m`` may be
astronomically large.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath

from .core.intervals import IntegerInterval
from .core.sparse import SparseVector, to_scalar
from .core.weights import WeightSequence
from .errors import PreconditionError, ShapeError


def apply_shift(w: WeightSequence, x: SparseVector, m: int) -> SparseVector:
    """``B_w^m x`` coordinate-wise; coordinates ``k <= m`` fall off."""
    if m < 0:
        raise PreconditionError("shift power must be nonnegative")
    if m == 0:
        return SparseVector._raw(dict(x.entries), x.p, x.field)
    out = {}
    for k, v in x.entries.items():
        if k > m:
            out[k - m] = v * w.product_mp(k - m, k - 1)
    return SparseVector._raw(out, x.p, x.field)


@dataclass(frozen=True)
class BlockVector:
    """``theta_I^w(x)``: the payload ``x`` spread over ``I`` and divided by weight products.

    ``values`` is the input tuple ``x``; ``payload[s-1] = x_s / prod_{j=s}^{lo+s-2} omega_j``
    sits at coordinate ``lo + s - 1``.
    """

    interval: IntegerInterval
    values: tuple
    payload: tuple
    weight: WeightSequence
    p: object = 2
    field: str = "real"

    def realize(self) -> SparseVector:
        lo = self.interval.lo
        return SparseVector._raw({lo + s: v for s, v in enumerate(self.payload)}, self.p, self.field)


def theta_embed(w: WeightSequence, interval: IntegerInterval, x, p=2, field: str | None = None) -> BlockVector:
    """Build ``theta_I^w(x)``; the product is empty (=1) when ``I`` starts at 1."""
    x = tuple(x)
    if len(x) != interval.size:
        raise ShapeError(f"payload of length {len(x)} for interval of size {interval.size}")
    if field is None:
        field = "complex" if any(isinstance(v, (complex, mpmath.mpc, tuple)) for v in x) else "real"
    values = tuple(to_scalar(v, field) for v in x)
    lo = interval.lo
    payload = tuple(v / w.product_mp(s, lo + s - 2) for s, v in enumerate(values, start=1))
    return BlockVector(interval, values, payload, w, p, field)


def shift_block(w: WeightSequence, block: BlockVector, m: int) -> SparseVector:
    """``B_w^m theta_I^w(x)``.

    For ``m <= lo - 1`` this is ``sum_s x_s / prod_{j=s}^{lo+s-m-2} omega_j e_{lo+s-m-1}``;
    for ``m >= hi`` it is zero; in between the general coordinate formula applies.
    """
    if m < 0:
        raise PreconditionError("shift power must be nonnegative")
    lo, hi = block.interval.lo, block.interval.hi
    if m >= hi:
        return SparseVector._raw({}, block.p, block.field)
    if m <= lo - 1:
        out = {}
        for s, v in enumerate(block.values, start=1):
            out[lo + s - m - 1] = v / w.product_mp(s, lo + s - m - 2)
        return SparseVector._raw(out, block.p, block.field)
    return apply_shift(w, block.realize(), m)


def distance_p(x: SparseVector, y: SparseVector) -> float:
    """``||x - y||_p``."""
    return (x - y).p_norm()


def shifted_coordinate(w: WeightSequence, x: SparseVector, m: int, k: int = 1):
    """``pi_k(B_w^m x)`` from the single entry ``x_{k+m}``; exactly zero off the support."""
    if m < 0 or k < 1:
        raise PreconditionError("need m >= 0 and k >= 1")
    v = x.entries.get(k + m)
    if v is None:
        return to_scalar(0, x.field)
    return v * w.product_mp(k, k + m - 1) if m else v
