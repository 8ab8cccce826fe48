"""Interval schedules: the families of intervals that carry the constructed vectors.

Level 1 is ``{1}``.  An even level ``k`` holds ``j_k`` translates of one interval
whose size comes from the fiber map; an odd level holds one interval as long as
the last index of the level before it.  Three variants:

* ``v1``: growth ratio ``(k-1)/k``, suffix products at most ``beta`` on odd
  levels, gaps from ``theta``, spacing ``theta(tau(k))`` and enough translates for
  the density floor ``1/(2 theta(tau(k)))``.
* ``v2``: one interval per level and the stronger growth ratio with
  ``max(g, tau(k))`` in the denominator.
* ``v3``: sizes and gaps from ``rho`` and the thresholds ``theta_r``; odd levels
  satisfy ``prod (1 + k/j) <= 2`` over the interval.

Every translation is the minimal admissible one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .._search import least_true
from ..core.intervals import IndexSet, IntegerInterval, IntervalProgression
from ..core.weights import WeightSequence, integer_mu_product, weight_from_dict
from ..errors import PreconditionError, ScheduleStuck
from .aset import next_a_member
from .fibers import FiberMap
from .theta import ThetaFamily, ThetaFunction

VARIANTS = ("v1", "v2", "v3")
DEFAULT_INTERVAL_CAP = None
JSON_LIST_LIMIT = 10**4


class Level:
    """The intervals of one level, stored as a progression or an explicit list."""

    def __init__(self, k: int, intervals):
        self.k = k
        self.intervals = intervals

    @classmethod
    def single(cls, k: int, interval: IntegerInterval) -> "Level":
        return cls(k, IntervalProgression(interval, interval.size, 1))

    @property
    def count(self) -> int:
        if isinstance(self.intervals, IntervalProgression):
            return self.intervals.count
        return len(self.intervals)

    def interval(self, u: int) -> IntegerInterval:
        """``psi_k(u)``, ``u`` counted from 1."""
        if not 1 <= u <= self.count:
            raise IndexError(u)
        if isinstance(self.intervals, IntervalProgression):
            return self.intervals.interval(u - 1)
        return self.intervals[u - 1]

    def __iter__(self):
        for u in range(1, self.count + 1):
            yield self.interval(u)

    @property
    def first(self) -> IntegerInterval:
        return self.interval(1)

    @property
    def last(self) -> IntegerInterval:
        return self.interval(self.count)

    def progressions(self) -> list:
        if isinstance(self.intervals, IntervalProgression):
            return [self.intervals]
        return [IntervalProgression(iv, iv.size, 1) for iv in self.intervals]

    def explicit(self) -> "Level":
        """A copy with an editable interval list."""
        return Level(self.k, list(self))

    @property
    def is_progression(self) -> bool:
        return isinstance(self.intervals, IntervalProgression)

    def to_json(self) -> dict:
        """Levels with more than ``JSON_LIST_LIMIT`` intervals list only the first and last."""
        out = {"k": str(self.k), "jk": str(self.count)}
        if self.is_progression:
            out["step"] = str(self.intervals.step)
        if self.is_progression and self.count > JSON_LIST_LIMIT:
            out["intervals"] = [self.first.to_list(), self.last.to_list()]
            out["abbreviated"] = True
        else:
            out["intervals"] = [iv.to_list() for iv in self]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Level":
        k = int(data["k"])
        ivs = [IntegerInterval.from_list(pair) for pair in data["intervals"]]
        if "step" in data:
            prog = IntervalProgression(ivs[0], int(data["step"]), int(data["jk"]))
            if data.get("abbreviated") or list(prog) == ivs:
                return cls(k, prog)
        return cls(k, ivs)


@dataclass
class IntervalSchedule:
    """Levels ``1..K`` of one variant together with the data that produced them."""

    variant: str
    p: Fraction
    levels: list
    fibers: FiberMap
    weight: WeightSequence | None = None
    beta: Fraction = Fraction(1)
    theta: ThetaFunction | ThetaFamily | None = None

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level(self, k: int) -> Level:
        if not 1 <= k <= len(self.levels):
            raise IndexError(f"level {k} not built")
        return self.levels[k - 1]

    def j(self, k: int) -> int:
        return self.level(k).count

    def interval(self, k: int, u: int = 1) -> IntegerInterval:
        return self.level(k).interval(u)

    @property
    def end(self) -> int:
        """Largest index used by the schedule."""
        return self.levels[-1].last.hi

    def m_set(self, bound: int | None = None) -> IndexSet:
        """The union of all intervals, as an index set."""
        progs = [pr for lv in self.levels for pr in lv.progressions()]
        return IndexSet.from_progressions(progs, bound if bound is not None else self.end)

    def first_interval_set(self, bound: int | None = None) -> IndexSet:
        """The union of the first interval of every level."""
        return IndexSet.from_intervals([lv.first for lv in self.levels], bound if bound is not None else self.end)

    # thresholds of the even levels

    def size_at(self, k: int) -> int:
        return self.fibers.size(k)

    def gap_threshold(self, k: int, g_first: int) -> int:
        """Required ``p(psi_k(1)) - g(psi_{k-1}(1))`` at the even level ``k``."""
        if self.variant == "v3":
            n, r = self.fibers.rho(k)
            j = self.fibers.enumeration.index(r)
            return self.theta(r, j, n + g_first)
        return self.theta(self.fibers.tau(k) + g_first)

    def spacing(self, k: int) -> int:
        """Distance between consecutive starts at the even level ``k``."""
        if self.variant == "v3":
            n = self.fibers.rho(k)[0]
            r = Fraction(n + 1, n)
            return self.theta(r, self.fibers.enumeration.index(r), n)
        return self.theta(self.fibers.tau(k))

    def theta_cache_json(self) -> dict:
        if self.theta is None:
            return {}
        if isinstance(self.theta, ThetaFamily):
            return {f"{r}|{j}|{n}": str(v) for (r, j, n), v in sorted(self.theta.cache.items())}
        return {str(k): str(v) for k, v in sorted(self.theta.cache.items())}

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "p": str(self.p),
            "beta": str(self.beta),
            "weight": self.weight.to_dict() if self.weight is not None else None,
            "fiber_kind": self.fibers.kind,
            "fibers": self.fibers.to_json(),
            "levels": [lv.to_json() for lv in self.levels],
            "theta_cache": self.theta_cache_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "IntervalSchedule":
        variant = data["variant"]
        p = Fraction(data["p"])
        weight = weight_from_dict(data["weight"]) if data.get("weight") else None
        fibers = FiberMap.from_json(data["fibers"])
        if variant == "v3":
            theta = ThetaFamily(p)
            for key, v in data.get("theta_cache", {}).items():
                r, j, n = key.split("|")
                theta.cache[(Fraction(r), int(j), int(n))] = int(v)
        else:
            theta = ThetaFunction(weight, p)
            theta.cache.update({int(k): int(v) for k, v in data.get("theta_cache", {}).items()})
        levels = [Level.from_json(lv) for lv in data["levels"]]
        return cls(variant, p, levels, fibers, weight, Fraction(data["beta"]), theta)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def density_count(first_lo: int, spacing: int) -> int:
    """Least ``j >= 1`` with ``j / (lo + (j-1) t) >= 1/(2t)``, i.e. ``j t >= lo - t``."""
    return max(1, _ceil_div(first_lo - spacing, spacing))


def _odd_start_v3(k: int, g: int) -> int:
    """Least ``n' >= k g`` with ``prod_{j=n'}^{n'+g-2} (1 + k/j) <= 2``."""

    def ok(n: int) -> bool:
        return integer_mu_product(k, n, n + g - 2) <= 2

    found = least_true(ok, max(1, k * g))
    if found is None:
        raise ScheduleStuck(k, "odd-level product bound never met")
    return found


def build_schedule(
    variant: str,
    levels: int,
    p=2,
    weight: WeightSequence | None = None,
    beta=None,
    fibers: FiberMap | None = None,
    theta=None,
    interval_cap: int = DEFAULT_INTERVAL_CAP,
    a_search_limit: int | None = None,
) -> IntervalSchedule:
    """Build levels ``1..levels`` of a schedule with minimal translations."""
    if variant not in VARIANTS:
        raise PreconditionError(f"unknown variant {variant!r}")
    if levels < 1:
        raise PreconditionError("need at least one level")
    p = Fraction(p)
    if variant == "v3":
        fibers = fibers or FiberMap("rho")
        if fibers.kind != "rho":
            raise PreconditionError("v3 needs the rho fiber map")
        theta = theta if theta is not None else ThetaFamily(p)
        beta = Fraction(1) if beta is None else Fraction(beta)
    else:
        if weight is None:
            raise PreconditionError(f"{variant} needs a weight")
        fibers = fibers or FiberMap("tau")
        if fibers.kind != "tau":
            raise PreconditionError(f"{variant} needs the tau fiber map")
        theta = theta if theta is not None else ThetaFunction(weight, p)
        if beta is None:
            from .aset import beta_for_weight

            beta = beta_for_weight(weight).value
        beta = Fraction(beta)
    sched = IntervalSchedule(variant, p, [Level.single(1, IntegerInterval(1, 1))], fibers, weight, beta, theta)
    for k in range(2, levels + 1):
        prev = sched.levels[-1]
        g_last = prev.last.hi
        g_first = prev.first.hi
        if k % 2 == 0:
            size = sched.size_at(k)
            gap = sched.gap_threshold(k, g_first)
            if variant == "v2":
                bound = max(g_last, sched.fibers.tau(k))
                lo = max(k * g_last + (k - 1) * bound, g_first + gap)
            else:
                lo = max(k * g_last, g_first + gap)
            lo = max(lo, g_last + 1)
            first = IntegerInterval(lo, lo + size - 1)
            if variant == "v2":
                sched.levels.append(Level.single(k, first))
                continue
            step = sched.spacing(k)
            count = density_count(lo, step)
            if interval_cap is not None and count > interval_cap:
                raise ScheduleStuck(k, f"{count} translates exceed the cap {interval_cap}")
            sched.levels.append(Level(k, IntervalProgression(first, step, count)))
        else:
            g = g_last
            if variant == "v3":
                start = _odd_start_v3(k, g)
                sched.levels.append(Level.single(k, IntegerInterval(start, start + g - 1)))
                continue
            need = k * g if variant == "v1" else (2 * k - 1) * g
            nprime = next_a_member(weight, g - 1, beta, need - 1, limit=a_search_limit)
            if nprime is None:
                raise ScheduleStuck(k, f"no member of A(N={g - 1}, beta={beta}) found from {need - 1}")
            sched.levels.append(Level.single(k, IntegerInterval(nprime + 1, nprime + g)))
    return sched


@dataclass(frozen=True)
class Violation:
    level: int
    condition: str
    detail: str

    def __str__(self):
        return f"level {self.level}: ({self.condition}) {self.detail}"


def validate_schedule(s: IntervalSchedule) -> list:
    """All violated conditions, checked with exact integer and rational arithmetic."""
    out = []
    tag = {"v1": "1", "v2": "2", "v3": "3"}[s.variant]
    first = s.level(1)
    if first.count != 1 or first.first != IntegerInterval(1, 1):
        out.append(Violation(1, "start", "level 1 must be the single interval {1}"))
    # disjoint and increasing across the whole schedule; a progression with
    # step >= size is increasing by construction
    prev_hi = 0
    for lv in s.levels:
        if lv.is_progression:
            if lv.first.lo <= prev_hi:
                out.append(Violation(lv.k, "order", f"interval 1 {lv.first} does not follow index {prev_hi}"))
            prev_hi = max(prev_hi, lv.last.hi)
            continue
        for u, iv in enumerate(lv, start=1):
            if iv.lo <= prev_hi:
                out.append(Violation(lv.k, "order", f"interval {u} {iv} does not follow index {prev_hi}"))
            prev_hi = max(prev_hi, iv.hi)
    for k in range(2, s.depth + 1):
        lv, prev = s.level(k), s.level(k - 1)
        lo = lv.first.lo
        g_last, g_first = prev.last.hi, prev.first.hi
        # growth ratio
        if s.variant == "v2":
            bound = max(g_last, s.fibers.tau(k)) if k % 2 == 0 else g_last
            ratio = Fraction(lo - g_last, lo + bound)
        else:
            ratio = Fraction(lo - g_last, lo)
        if ratio < Fraction(k - 1, k):
            out.append(Violation(k, "A" + tag, f"ratio {ratio} < {k - 1}/{k}"))
        if s.variant == "v2" and lv.count != 1:
            out.append(Violation(k, "j", "v2 levels hold one interval"))
        if k % 2 == 1:
            out.extend(_check_odd(s, k, lv, g_last, tag))
        else:
            out.extend(_check_even(s, k, lv, g_first, tag))
    return out


def _check_odd(s, k, lv, g_last, tag):
    out = []
    if lv.count != 1:
        out.append(Violation(k, "B" + tag, f"odd level holds {lv.count} intervals"))
    iv = lv.first
    if iv.size != g_last:
        out.append(Violation(k, "B" + tag, f"size {iv.size} != {g_last}"))
    if s.variant == "v3":
        prod = integer_mu_product(k, iv.lo, iv.hi - 1)
        if prod > 2:
            out.append(Violation(k, "B" + tag, f"product {float(prod)} > 2"))
    elif iv.size > 1:
        held = s.weight.suffix_bound_holds(iv.lo - 1, iv.size - 1, s.beta)
        if held is None:
            out.append(Violation(k, "B" + tag, "suffix bound within the decision margin"))
        elif not held:
            out.append(Violation(k, "B" + tag, f"suffix product exceeds beta = {s.beta}"))
    return out


def _check_even(s, k, lv, g_first, tag):
    out = []
    gap = s.gap_threshold(k, g_first)
    if lv.first.lo - g_first < gap:
        out.append(Violation(k, "C" + tag, f"gap {lv.first.lo - g_first} < {gap}"))
    size = s.size_at(k)
    # translates of one interval share its size and spacing
    sized = [(1, lv.first)] if lv.is_progression else enumerate(lv, start=1)
    for u, iv in sized:
        if iv.size != size:
            out.append(Violation(k, "D" + tag, f"interval {u} has size {iv.size} != {size}"))
    if s.variant == "v2":
        return out
    step = s.spacing(k)
    if lv.is_progression:
        if lv.count > 1 and lv.intervals.step != step:
            out.append(Violation(k, "E" + tag, f"start difference {lv.intervals.step} != {step}"))
    else:
        for u in range(2, lv.count + 1):
            diff = lv.interval(u).lo - lv.interval(u - 1).lo
            if diff != step:
                out.append(Violation(k, "E" + tag, f"start difference {diff} != {step} at u = {u}"))
    j = lv.count
    density = Fraction(j, lv.first.lo + (j - 1) * step)
    if density < Fraction(1, 2 * step):
        out.append(Violation(k, "F" + tag, f"density {density} < 1/{2 * step}"))
    return out
