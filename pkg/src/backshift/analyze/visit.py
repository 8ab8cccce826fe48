"""Visit certificates: ``B^{s'} x_0`` lands within ``delta`` of ``y_0`` for exponents ``s'`` of the selected levels.

The distance splits into three terms evaluated directly on the realized
vectors, each padded with the certified bound on the omitted blocks:

* the main term ``||eps B^{s'} xt_{q0} - y_0||_p`` (bound ``delta/2``),
* the distinguished coordinates ``sum_{q >= q0} |lambda_q|^p ||B^{s'} e_{d_q}||_p^p``,
* the other vectors ``eps^p sum_{q > q0} |lambda_q|^p ||B^{s'} xt_q||_p^p``

(both last bounds ``delta^p / 2^(p+1)``).  V1/V2 use ``B_w``; V3 uses
``B_{w_mu}`` on vectors whose blocks carry the weights ``w_r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from ..core.sparse import SparseVector, to_scalar
from ..core.weights import ParametricWeight
from ..errors import HorizonTooSmall, NeedDeeperSchedule, PreconditionError
from ..shift import apply_shift
from ..vectors.context import ConstructionContext, apply_T, phi
from .returns import return_set, selected_levels, s_elements


def _mp(x) -> mpmath.mpf:
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / x.denominator


def _p_mp(p: Fraction):
    return p.numerator if p.denominator == 1 else _mp(p)


@dataclass
class VisitQuery:
    """Target ``y0``, radius ``delta`` and the vector ``x0 = T(lam)``.

    ``lam`` maps ``q`` to ``lambda_q``; its first nonzero entry must be 1.
    ``n_star`` is the size of the blocks used for the visit.  For V3, ``mu``
    selects the shift ``B_{w_mu}``, ``y1`` is the ball point the visit uses and
    ``v_sequence`` lists the rationals whose levels form the exponent set.
    """

    lam: dict
    y0: SparseVector
    delta: Fraction
    n_star: int
    mu: Fraction | None = None
    y1: tuple | None = None
    v_sequence: tuple = ()

    def __post_init__(self):
        self.delta = Fraction(self.delta)
        if self.delta <= 0:
            raise PreconditionError("delta must be positive")
        self.lam = {int(q): v for q, v in self.lam.items() if to_scalar(v, "complex") != 0}
        if not self.lam:
            raise PreconditionError("lambda must be nonzero")
        if to_scalar(self.lam[self.q0], "complex") != 1:
            raise PreconditionError("normalize lambda so that its first nonzero entry is 1")
        if any(k > self.n_star for k in self.y0.entries):
            raise PreconditionError("the support of y0 must lie in [1, n*]")
        if self.mu is not None:
            self.mu = Fraction(self.mu)
        self.v_sequence = tuple(Fraction(v) for v in self.v_sequence)

    @property
    def q0(self) -> int:
        return min(self.lam)

    def lambda_norm_mp(self, p: Fraction) -> mpmath.mpf:
        vec = SparseVector._raw({q: to_scalar(v, "complex") for q, v in self.lam.items()}, p, "complex")
        return vec.p_norm_mp()

    def to_json(self) -> dict:
        return {
            "lambda": {str(q): str(v) for q, v in sorted(self.lam.items())},
            "y0": self.y0.to_json(),
            "delta": str(self.delta),
            "n_star": str(self.n_star),
            "mu": None if self.mu is None else str(self.mu),
            "y1": None if self.y1 is None else [str(v) for v in self.y1],
            "v_sequence": [str(v) for v in self.v_sequence],
        }


@dataclass
class VisitThresholds:
    """``eta_0``, ``l_0``, ``l_1``, ``s_0`` and the exponent set available in the built levels."""

    eta0: mpmath.mpf
    n0: int
    l0: int
    l1: int
    s0: int
    exponents: list = field(repr=False)
    levels: list = field(default_factory=list)

    @property
    def admissible(self) -> list:
        """Exponents strictly above ``s_0``."""
        return [s for s in self.exponents if s > self.s0]


@dataclass
class ClaimReport:
    """Terms of one visit; pass flags are recomputed from terms and bounds."""

    s_prime: int
    labels: tuple
    terms: tuple
    bounds: tuple
    direct_distance: mpmath.mpf
    final_distance: mpmath.mpf
    delta: Fraction
    query: dict = field(default_factory=dict, repr=False)

    @property
    def term_pass(self) -> tuple:
        return tuple(t < b for t, b in zip(self.terms, self.bounds))

    @property
    def decomposition_bound(self) -> mpmath.mpf:
        """``term_1 + (term_2 + term_3)^(1/p)``."""
        p = Fraction(self.query.get("p", "2"))
        inner = self.terms[1] + self.terms[2]
        return self.terms[0] + (mpmath.power(inner, 1 / _mp(p)) if inner > 0 else 0)

    @property
    def passed(self) -> bool:
        return all(self.term_pass) and self.final_distance < _mp(self.delta) and self.decomposition_bound < _mp(self.delta)

    def to_json(self) -> dict:
        return {
            "query": self.query,
            "s_prime": str(self.s_prime),
            "terms": {lab: mpmath.nstr(t, 17) for lab, t in zip(self.labels, self.terms)},
            "bounds": {lab: mpmath.nstr(b, 17) for lab, b in zip(self.labels, self.bounds)},
            "pass": {lab: bool(ok) for lab, ok in zip(self.labels, self.term_pass)},
            "final_distance": mpmath.nstr(self.final_distance, 17),
            "direct_distance": mpmath.nstr(self.direct_distance, 17),
            "decomposition_bound": mpmath.nstr(self.decomposition_bound, 17),
            "passed": self.passed,
        }


def shift_weight(ctx: ConstructionContext, vq: VisitQuery):
    if ctx.variant == "v3":
        if vq.mu is None:
            raise PreconditionError("a V3 visit needs mu")
        return ParametricWeight(vq.mu)
    return ctx.schedule.weight


def _ball_selector(ctx: ConstructionContext, vq: VisitQuery):
    """Positions ``i`` whose ball point lies in ``eps^-1 B(y0, delta/4)``."""
    eps = _mp(ctx.epsilon)
    radius = _mp(vq.delta) / (4 * eps)
    center = vq.y0.scale(1 / eps)
    cache = {}

    def within(point) -> bool:
        key = tuple(point)
        if key not in cache:
            e = ctx.enumerator(vq.n_star)
            vec = SparseVector._raw({s: v for s, v in enumerate(e.as_scalars(point), start=1)}, ctx.p, ctx.field)
            cache[key] = (vec - center).p_norm_mp() < radius
        return cache[key]

    if ctx.variant == "v3":
        return lambda i, r: tuple(phi(ctx, vq.n_star, vq.q0, i, r)) == tuple(vq.y1)
    return lambda i: within(phi(ctx, vq.n_star, vq.q0, i))


def visit_thresholds(ctx: ConstructionContext, vq: VisitQuery) -> VisitThresholds:
    """The thresholds fixed before the visit exponents, computed from the realized ``lambda``."""
    p = ctx.p
    pp = _p_mp(p)
    eps = _mp(ctx.epsilon)
    delta = _mp(vq.delta)
    lam_norm_p = vq.lambda_norm_mp(p) ** pp
    v3 = ctx.variant == "v3"
    if v3:
        eta0 = min(delta**pp / (8**pp * eps**pp), delta**pp / (eps**pp * 2 ** (pp + 1) * lam_norm_p))
        n0 = 1
        while mpmath.power(2, -n0 + 2) >= eta0 or Fraction(n0 + 1, n0) > (vq.mu + 1) / 2:
            n0 += 1
        tail_limit = delta**pp / 2 ** (pp + 2)
    else:
        eta0 = min(delta**pp / (4**pp * eps**pp), delta**pp / (eps**pp * 2 ** (pp + 1) * lam_norm_p))
        n0 = 1
        while mpmath.power(2, -n0 + 1) >= eta0:
            n0 += 1
        tail_limit = delta**pp / (2 ** (pp + 1) * _mp(ctx.schedule.beta))
    abs_p = {q: abs(to_scalar(v, "complex")) ** pp for q, v in vq.lam.items()}
    l0 = 1
    while mpmath.fsum(a for q, a in abs_p.items() if q >= l0) >= tail_limit:
        l0 += 1
    # B^{l1} kills e_d exactly when l1 >= d
    limit_q = max(l0, (vq.mu + 1) / 2) if v3 else l0
    l1 = l0
    q = 1
    while q < limit_q:
        l1 = max(l1, ctx.distinguished(q))
        q += 1
    if v3:
        if vq.y1 is None:
            raise PreconditionError("a V3 visit needs the ball point y1")
        rs = vq.v_sequence or (vq.mu,)
        levels = selected_levels(ctx.schedule, vq.n_star, vq.q0, _ball_selector(ctx, vq), rs)
    else:
        levels = selected_levels(ctx.schedule, vq.n_star, vq.q0, _ball_selector(ctx, vq))
    if not levels:
        raise NeedDeeperSchedule(f"no built level of size {vq.n_star} carries the target for q0 = {vq.q0}")
    exponents = s_elements(ctx.schedule, levels)
    s0 = None
    for s in exponents:
        if s < l1:
            continue
        if v3:
            if mpmath.power(2, -(s + vq.n_star) + 1) >= eta0 or not _gaps_exceed(ctx.schedule, s + 1, vq.mu):
                continue
        elif mpmath.power(2, -s) >= eta0:
            continue
        s0 = s
        break
    if s0 is None:
        raise NeedDeeperSchedule("no exponent of the built levels meets the thresholds for s_0")
    return VisitThresholds(eta0, n0, l0, l1, s0, exponents, levels)


def _gaps_exceed(schedule, start: int, mu) -> bool:
    """``p(psi_k(1)) - g(psi_{k-1}(last)) >= mu`` for every built level starting at or after ``start``."""
    for k in range(2, schedule.depth + 1):
        lv = schedule.level(k)
        if lv.first.lo >= start and lv.first.lo - schedule.level(k - 1).last.hi < mu:
            return False
    return True


def shifted_tail(ctx: ConstructionContext, q: int, s_prime: int, mu=None) -> mpmath.mpf:
    """Certified bound on ``||B^{s'} (omitted part of xt_q)||_p``."""
    built = ctx.build(q)
    if s_prime > built.omitted_g:
        raise HorizonTooSmall(f"shift {s_prime} exceeds {built.omitted_g}; the tail bound covers shifts up to it")
    bound = built.tail_bound
    if ctx.variant == "v3" and mu is not None and Fraction(mu) > 3:
        bound *= mpmath.power((1 + _mp(mu)) / 4, s_prime)
    return bound


def visit_certificate(ctx: ConstructionContext, vq: VisitQuery, s_prime: int, thresholds: VisitThresholds | None = None) -> ClaimReport:
    """Evaluate the three terms at ``s'`` and the full distance ``||B^{s'} x0 - y0||_p``."""
    th = thresholds or visit_thresholds(ctx, vq)
    if s_prime not in th.exponents:
        raise PreconditionError(f"{s_prime} is not in the exponent set of the selected levels")
    if s_prime <= th.s0:
        raise PreconditionError(f"{s_prime} does not exceed s_0 = {th.s0}")
    w = shift_weight(ctx, vq)
    p = ctx.p
    pp = _p_mp(p)
    eps = _mp(ctx.epsilon)
    delta = _mp(vq.delta)
    q0 = vq.q0
    mu = vq.mu
    main = apply_shift(w, ctx.build(q0).tilde, s_prime).scale(eps) - vq.y0
    term1 = main.p_norm_mp() + eps * shifted_tail(ctx, q0, s_prime, mu)
    term2 = mpmath.mpf(0)
    term3 = mpmath.mpf(0)
    tails_p = mpmath.mpf(0)
    for q, lam_q in sorted(vq.lam.items()):
        a = abs(to_scalar(lam_q, "complex")) ** pp
        d = ctx.distinguished(q)
        if d > s_prime:
            term2 += a * w.product_mp(d - s_prime, d - 1) ** pp
        tail = shifted_tail(ctx, q, s_prime, mu)
        tails_p += a * tail**pp
        if q > q0:
            shifted = apply_shift(w, ctx.build(q).tilde, s_prime)
            term3 += eps**pp * a * (shifted.p_norm_mp() + tail) ** pp
    x0 = apply_T(ctx, vq.lam)
    direct = (apply_shift(w, x0, s_prime) - vq.y0).p_norm_mp()
    final = direct + eps * (mpmath.power(tails_p, 1 / _mp(p)) if tails_p > 0 else 0)
    half = delta**pp / 2 ** (pp + 1)
    labels = ("IV", "V", "VI") if ctx.variant == "v3" else ("I", "II", "III")
    query = vq.to_json()
    query["p"] = str(p)
    query["epsilon"] = str(ctx.epsilon)
    query["variant"] = ctx.variant
    return ClaimReport(s_prime, labels, (term1, term2, term3), (delta / 2, half, half), direct, final, vq.delta, query)


def certified_visits(ctx: ConstructionContext, vq: VisitQuery, count: int) -> list:
    """Reports for the first ``count`` exponents above ``s_0``."""
    th = visit_thresholds(ctx, vq)
    chosen = th.admissible[:count]
    if len(chosen) < count:
        raise NeedDeeperSchedule(f"only {len(chosen)} exponents above s_0 = {th.s0} in the built levels")
    return [visit_certificate(ctx, vq, s, th) for s in chosen]


def cross_check(ctx: ConstructionContext, vq: VisitQuery, reports) -> bool:
    """Every certified exponent also lies in the directly evaluated return set."""
    w = shift_weight(ctx, vq)
    x0 = apply_T(ctx, vq.lam)
    found = return_set(w, x0, vq.y0, vq.delta, [r.s_prime for r in reports])
    return all(r.s_prime in found for r in reports if r.passed)
