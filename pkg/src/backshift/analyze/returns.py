"""Return sets, the exponent sets built from the selected levels, and their densities."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..core.density import density_at
from ..core.intervals import IndexSet, IntegerInterval, IntervalProgression
from ..core.sparse import SparseVector
from ..core.weights import WeightSequence
from ..errors import NeedDeeperSchedule, PreconditionError
from ..shift import apply_shift, distance_p


def return_set(w: WeightSequence, x: SparseVector, y0: SparseVector, delta, candidates) -> IndexSet:
    """``{n in candidates : ||B_w^n x - y0||_p < delta}``.

    ``candidates`` is an :class:`IndexSet` (enumerated up to its bound) or any
    iterable of exponents.
    """
    if isinstance(candidates, IndexSet):
        pool = candidates.members_upto(candidates.bound)
        bound = candidates.bound
    else:
        pool = sorted(int(n) for n in candidates)
        bound = pool[-1] if pool else 0
    delta = float(delta)
    hits = [n for n in pool if distance_p(apply_shift(w, x, n), y0) < delta]
    return IndexSet.from_list(hits, bound)


@dataclass(frozen=True)
class SelectedLevel:
    """An even level whose blocks carry the target point for ``x_{q0}``."""

    k: int
    position: int
    r: Fraction | None


def selected_levels(schedule, n_star: int, q0: int, selector=None, rs=None) -> list:
    """Even levels of size ``n*`` whose fiber position lies in the part of ``q0``.

    V1/V2: the part is ``A_{q0}``; ``selector(i)`` can narrow the positions
    further (the ball condition on ``Phi(i)``).  V3: the fiber is ``(n*, r)``
    for ``r`` in ``rs`` and the position must lie in ``A_r^{q0}``.
    """
    from ..vectors.partition import PartitionMap

    out = []
    fibers = schedule.fibers
    if schedule.variant == "v3":
        part = PartitionMap("double", fibers.enumeration)
        wanted = None if rs is None else {Fraction(r) for r in rs}
        for k in range(2, schedule.depth + 1, 2):
            n, r = fibers.rho(k)
            if n != n_star or (wanted is not None and r not in wanted):
                continue
            i = fibers.fiber_position(k)
            if part.part_of(i) == (q0, r) and (selector is None or selector(i, r)):
                out.append(SelectedLevel(k, i, r))
        return out
    part = PartitionMap("single")
    for k in range(2, schedule.depth + 1, 2):
        if fibers.tau(k) != n_star:
            continue
        i = fibers.fiber_position(k)
        if part.part_of(i) == q0 and (selector is None or selector(i)):
            out.append(SelectedLevel(k, i, None))
    return out


def s_elements(schedule, levels) -> list:
    """``p(I) - 1`` over every interval of the given levels, increasing."""
    out = []
    for sl in levels:
        for iv in schedule.level(sl.k):
            out.append(iv.lo - 1)
    return sorted(out)


def schedule_S(schedule, n_star: int, q0: int, count: int, selector=None, rs=None) -> list:
    """The first ``count`` elements of the exponent set built on the selected levels."""
    levels = selected_levels(schedule, n_star, q0, selector, rs)
    have = sum(schedule.level(sl.k).count for sl in levels)
    if have < count:
        raise NeedDeeperSchedule(f"only {have} exponents available from {len(levels)} selected levels; {count} requested")
    out = []
    for sl in levels:
        level = schedule.level(sl.k)
        for u in range(1, min(level.count, count - len(out)) + 1):
            out.append(level.interval(u).lo - 1)
        if len(out) >= count:
            break
    return sorted(out)[:count]


@dataclass(frozen=True)
class SDensityRow:
    level: int
    horizon: int
    count: int
    density: Fraction
    floor: Fraction

    @property
    def passed(self) -> bool:
        return self.density >= self.floor


def s_density_report(schedule, n_star: int, q0: int, selector=None) -> list:
    """Density of the exponent set at ``p(last interval) - 1`` of each selected level, against ``1/(2 theta(n*))``.

    Counting is exact: the selected levels are progressions, so the count below
    a horizon is a closed form.
    """
    if schedule.variant == "v3":
        raise PreconditionError("use the V1/V2 exponent set for this floor")
    levels = selected_levels(schedule, n_star, q0, selector)
    if not levels:
        raise NeedDeeperSchedule(f"no level of size {n_star} in the part of q0 = {q0}")
    floor = Fraction(1, 2 * schedule.theta(n_star))
    # the starts p(I) - 1 of a progression form a progression of points
    points = []
    for sl in levels:
        for pr in schedule.level(sl.k).progressions():
            points.append(IntervalProgression(IntegerInterval(pr.lo - 1, pr.lo - 1), max(pr.step, 1), pr.count))
    starts = IndexSet.from_progressions(points)
    rows = []
    for sl in levels:
        horizon = schedule.level(sl.k).last.lo - 1
        c = starts.count_upto(horizon)
        rows.append(SDensityRow(sl.k, horizon, c, density_at(starts, horizon), floor))
    return rows
