"""The one-parameter family: continuity windows around each ``r`` and the rationals converging to ``mu``.

For the level carrying ``y1`` with weight ``w_r`` (block starts ``p_1 < ... < p_N``):

``Lambda_r(xi) = max_u sum_{s=1}^{n*} |prod_{l=s}^{p_u+s-2} (l+xi)/(l+r) - 1|^p``

``Gamma_r^m(xi) = sum_{u=m}^{N} sum_{s=1}^{n*} prod_{l=p_u+s-p_{m-1}}^{p_u+s-2} (1+xi/l)^p / prod_{l=s}^{p_u+s-2} (1+r/l)^p``

Products are evaluated through log-gamma differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from ..core.weights import ParametricWeight, precision_for
from ..errors import NeedDeeperSchedule, PreconditionError, SearchFailed
from ..vectors.context import ConstructionContext, apply_T, find_index
from .density_checks import non_fhc_certificate
from .visit import VisitQuery, certified_visits, cross_check

DEFAULT_GRID = 33
DEFAULT_MIN_DELTA = 1e-12


def _mp(x) -> mpmath.mpf:
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / x.denominator


def _log_rising(a: int, b: int, xi) -> mpmath.mpf:
    """``log prod_{l=a}^{b} (l + xi)``."""
    if b < a:
        return mpmath.mpf(0)
    return mpmath.loggamma(b + 1 + xi) - mpmath.loggamma(a + xi)


def _log_ratio_product(a: int, b: int, xi) -> mpmath.mpf:
    """``log prod_{l=a}^{b} (1 + xi/l)``."""
    if b < a:
        return mpmath.mpf(0)
    return _log_rising(a, b, xi) - (mpmath.loggamma(b + 1) - mpmath.loggamma(a))


@dataclass(frozen=True)
class FamilyLevel:
    """The level ``phi~(n*, r, i_r)`` and its block starts."""

    r: Fraction
    k: int
    position: int
    starts: tuple


def resolve_level(ctx: ConstructionContext, n_star: int, q0: int, y1, r) -> FamilyLevel:
    """Locate ``i_r`` (the member of ``A_r^{q0}`` mapped to ``y1``) and its level."""
    if ctx.variant != "v3":
        raise PreconditionError("the family analysis needs a v3 context")
    r = Fraction(r)
    i_r = find_index(ctx, n_star, q0, tuple(y1), r)
    fibers = ctx.schedule.fibers
    depth = ctx.schedule.depth
    seen = 0
    for k in range(2, depth + 1, 2):
        if fibers.rho(k) == (n_star, r):
            seen += 1
            if seen == i_r:
                level = ctx.schedule.level(k)
                return FamilyLevel(r, k, i_r, tuple(iv.lo for iv in level))
    raise NeedDeeperSchedule(f"i_r = {i_r} for r = {r} lies beyond the {seen} built levels of fiber ({n_star}, {r})")


def lambda_r(ctx: ConstructionContext, level: FamilyLevel, n_star: int, xi) -> mpmath.mpf:
    xi = _mp(xi)
    r = _mp(level.r)
    p = ctx.p
    pp = _mp(p)
    best = mpmath.mpf(0)
    with mpmath.workprec(precision_for(level.starts[-1] + n_star)):
        for pu in level.starts:
            total = mpmath.mpf(0)
            for s in range(1, n_star + 1):
                log_ratio = _log_rising(s, pu + s - 2, xi) - _log_rising(s, pu + s - 2, r)
                total += abs(mpmath.expm1(log_ratio)) ** pp
            best = max(best, total)
    return +best


def gamma_rm(ctx: ConstructionContext, level: FamilyLevel, n_star: int, m: int, xi) -> mpmath.mpf:
    n_blocks = len(level.starts)
    if not 2 <= m <= n_blocks:
        raise PreconditionError(f"m must lie in [2, {n_blocks}]")
    xi = _mp(xi)
    r = _mp(level.r)
    pp = _mp(ctx.p)
    p_prev = level.starts[m - 2]
    terms = []
    with mpmath.workprec(precision_for(level.starts[-1] + n_star)):
        for pu in level.starts[m - 1 :]:
            for s in range(1, n_star + 1):
                num = _log_ratio_product(pu + s - p_prev, pu + s - 2, xi)
                den = _log_ratio_product(s, pu + s - 2, r)
                terms.append(mpmath.exp(pp * (num - den)))
        total = mpmath.fsum(terms)
    return +total


@dataclass
class DeltaChoice:
    r: Fraction
    value: Fraction
    grid: int
    refinement_passed: bool
    halvings: int
    lambda_limit: mpmath.mpf = field(repr=False, default=mpmath.mpf(0))
    gamma_limit: mpmath.mpf = field(repr=False, default=mpmath.mpf(0))

    def to_json(self) -> dict:
        return {
            "r": str(self.r),
            "delta_r": str(self.value),
            "grid": self.grid,
            "refinement_passed": self.refinement_passed,
            "halvings": self.halvings,
        }


def _grid(r: Fraction, width: Fraction, points: int) -> list:
    """``points`` values evenly inside ``(r - width, r + width)``, symmetric about ``r``."""
    return [r + width * Fraction(2 * i - points - 1, points + 1) for i in range(1, points + 1)]


def _window_holds(ctx, level, n_star, width, points, lambda_limit, gamma_limit, centers) -> bool:
    for xi in _grid(level.r, width, points):
        if lambda_r(ctx, level, n_star, xi) >= lambda_limit:
            return False
        for m, center in centers.items():
            if abs(gamma_rm(ctx, level, n_star, m, xi) - center) >= gamma_limit:
                return False
    return True


def find_delta_r(
    ctx: ConstructionContext,
    level: FamilyLevel,
    n_star: int,
    mu,
    delta,
    epsilon,
    eta0_tilde,
    grid: int = DEFAULT_GRID,
    minimum: float = DEFAULT_MIN_DELTA,
) -> DeltaChoice:
    """Halve from ``(mu-1)/2`` until both window conditions hold on the sample grid.

    The returned value is also checked at half the width with a grid four times
    finer (``refinement_passed``).
    """
    mu = Fraction(mu)
    if mu <= 1:
        raise PreconditionError("mu must exceed 1")
    pp = _mp(ctx.p)
    lambda_limit = _mp(delta) ** pp / (8**pp * _mp(epsilon) ** pp)
    gamma_limit = eta0_tilde / 4
    centers = {m: gamma_rm(ctx, level, n_star, m, level.r) for m in range(2, len(level.starts) + 1)}
    width = (mu - 1) / 2
    halvings = 0
    while True:
        width /= 2
        halvings += 1
        if width < minimum:
            raise SearchFailed(f"no window above {minimum} around r = {level.r}")
        if width >= level.r - 1:
            continue
        if _window_holds(ctx, level, n_star, width, grid, lambda_limit, gamma_limit, centers):
            finer = 4 * (grid + 1) - 1
            refined = _window_holds(ctx, level, n_star, width / 2, finer, lambda_limit, gamma_limit, centers)
            return DeltaChoice(level.r, width, grid, refined, halvings, lambda_limit, gamma_limit)


def _candidates(mu: Fraction, limit: int):
    yield mu
    for m in range(1, limit + 1):
        for v in (mu + Fraction(1, m), mu - Fraction(1, m)):
            if v > 1:
                yield v


def build_v_sequence(ctx: ConstructionContext, vq: VisitQuery, mu, count: int, eta0_tilde, max_candidates: int = 64, grid: int = DEFAULT_GRID) -> list:
    """``count`` distinct rationals ``v`` with ``|v - mu| < delta_v``, each with its window.

    Candidates are ``mu`` itself and then ``mu +- 1/m`` for growing ``m``; a
    candidate whose level is not built is skipped.
    """
    mu = Fraction(mu)
    found = []
    missing = 0
    for v in _candidates(mu, max_candidates):
        try:
            level = resolve_level(ctx, vq.n_star, vq.q0, vq.y1, v)
        except NeedDeeperSchedule:
            missing += 1
            continue
        choice = find_delta_r(ctx, level, vq.n_star, mu, vq.delta, ctx.epsilon, eta0_tilde, grid)
        if abs(v - mu) < choice.value:
            found.append(choice)
            if len(found) == count:
                return found
    if missing:
        raise NeedDeeperSchedule(f"found {len(found)} of {count} rationals; {missing} candidates have no built level")
    raise SearchFailed(f"found {len(found)} of {count} rationals near {mu}")


@dataclass
class FamilyMemberReport:
    mu: Fraction
    v_sequence: list = field(default_factory=list)
    visits: list = field(default_factory=list)
    cross_checked: bool = False
    non_fhc: object = None
    error: str | None = None

    @property
    def passed(self) -> bool:
        return (
            self.error is None
            and bool(self.visits)
            and all(v.passed for v in self.visits)
            and self.cross_checked
            and self.non_fhc is not None
            and self.non_fhc.passed
            and all(c.refinement_passed for c in self.v_sequence)
        )

    def to_json(self) -> dict:
        return {
            "mu": str(self.mu),
            "v_sequence": [c.to_json() for c in self.v_sequence],
            "visits": [v.to_json() for v in self.visits],
            "cross_checked": self.cross_checked,
            "non_fhc": None if self.non_fhc is None else self.non_fhc.to_json(),
            "error": self.error,
            "passed": self.passed,
        }


def family_certificate(ctx: ConstructionContext, lam: dict, y0, delta, n_star: int, y1, mus, visits_per_mu: int = 1, v_count: int = 1) -> list:
    """One ``x0 = T(lam)`` checked against ``B_{w_mu}`` for each ``mu``.

    Failures that stem from the finite schedule (``NeedDeeperSchedule``) are
    recorded in the member report rather than raised.
    """
    x0 = apply_T(ctx, lam)
    out = []
    for mu in mus:
        mu = Fraction(mu)
        rep = FamilyMemberReport(mu)
        rep.non_fhc = non_fhc_certificate(ctx.schedule, x0, w=ParametricWeight(mu))
        try:
            probe = VisitQuery(lam, y0, delta, n_star, mu=mu, y1=tuple(y1))
            rep.v_sequence = build_v_sequence(ctx, probe, mu, v_count, _eta0_tilde(ctx, probe))
            vq = VisitQuery(lam, y0, delta, n_star, mu=mu, y1=tuple(y1), v_sequence=tuple(c.r for c in rep.v_sequence))
            rep.visits = certified_visits(ctx, vq, visits_per_mu)
            rep.cross_checked = cross_check(ctx, vq, rep.visits)
        except (NeedDeeperSchedule, SearchFailed) as exc:
            rep.error = f"{type(exc).__name__}: {exc}"
        out.append(rep)
    return out


def _eta0_tilde(ctx: ConstructionContext, vq: VisitQuery) -> mpmath.mpf:
    pp = _mp(ctx.p)
    eps = _mp(ctx.epsilon)
    delta = _mp(vq.delta)
    lam_p = vq.lambda_norm_mp(ctx.p) ** pp
    return min(delta**pp / (8**pp * eps**pp), delta**pp / (eps**pp * 2 ** (pp + 1) * lam_p))
