"""Finding a long interval on which every suffix sum stays at most 1.

Given ``delta_1, ..., delta_{2**n}`` in ``[-1, 1]`` with total at most 1, there is
an interval ``I`` in ``[1, 2**n]`` with ``|I| >= n`` and
``sum_{j=u}^{max I} delta_j <= 1`` for every ``u`` in ``I``.

The search scans from the right.  If the length-``n`` window ending at the
current right end ``R`` has a suffix with sum above 1, the start ``s`` of the
shortest such suffix becomes the new boundary and the scan restarts at
``R = s - 1``.  Each step consumes at most ``n`` indices while accumulating
more than 1, so the scan cannot run past ``2n`` before the total exceeds
``1 + 2n``; some window must therefore pass first.
"""

from __future__ import annotations

from fractions import Fraction

from ..core.intervals import IntegerInterval
from ..errors import InternalError, PreconditionError


def _exact(deltas) -> list:
    return [d if isinstance(d, Fraction) else Fraction(d) for d in deltas]


def _check_inputs(values: list, n: int):
    if n < 7:
        raise PreconditionError("the interval finder needs n >= 7")
    if len(values) != 2**n:
        raise PreconditionError(f"expected {2**n} values, got {len(values)}")
    if any(v < -1 or v > 1 for v in values):
        raise PreconditionError("values must lie in [-1, 1]")
    if sum(values) > 1:
        raise PreconditionError("values must sum to at most 1")


def find_good_interval(deltas, n: int) -> IntegerInterval:
    """Right-to-left greedy scan; returns a valid interval extended as far left as possible."""
    values = _exact(deltas)
    _check_inputs(values, n)
    prefix = [Fraction(0)]
    for v in values:
        prefix.append(prefix[-1] + v)

    right = 2**n
    cuts = []
    while right >= n:
        total = prefix[right]
        bad = None
        for u in range(right, right - n, -1):
            if total - prefix[u - 1] > 1:
                bad = u
                break
        if bad is None:
            left = right - n + 1
            while left > 1 and total - prefix[left - 2] <= 1:
                left -= 1
            return IntegerInterval(left, right)
        cuts.append(bad)
        right = bad - 1
    raise InternalError(
        "no window passed before the scan reached the left edge",
        dump={"n": n, "cuts": cuts, "values": [str(v) for v in values]},
    )


def is_good_interval(deltas, n: int, interval: IntegerInterval) -> bool:
    """Independent check of the three conditions, re-summing every suffix."""
    values = _exact(deltas)
    if interval.lo < 1 or interval.hi > 2**n or interval.size < n:
        return False
    for u in range(interval.lo, interval.hi + 1):
        if sum(values[u - 1 : interval.hi]) > 1:
            return False
    return True
