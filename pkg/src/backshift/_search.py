"""Galloping search for the least integer satisfying a monotone predicate."""

from __future__ import annotations


def least_true(predicate, start: int, max_bits: int = 4096) -> int | None:
    """Least ``m >= start`` with ``predicate(m)``, assuming monotonicity.

    Returns ``None`` if the predicate is still false once the search step
    exceeds ``2**max_bits``.
    """
    if predicate(start):
        return start
    lo = start
    step = 1
    hi = start + step
    while not predicate(hi):
        lo = hi
        step *= 2
        if step.bit_length() > max_bits:
            return None
        hi = start + step
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return hi
