import json
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from backshift.analyze.density_checks import non_fhc_certificate, non_ufhc_certificate
from backshift.analyze.family import (
    _eta0_tilde,
    _log_ratio_product,
    build_v_sequence,
    find_delta_r,
    gamma_rm,
    lambda_r,
    resolve_level,
)
from backshift.analyze.returns import return_set, s_elements, schedule_S, selected_levels
from backshift.analyze.visit import VisitQuery, _ball_selector, certified_visits, cross_check, visit_certificate, visit_thresholds
from backshift.core.intervals import IndexSet
from backshift.core.sparse import SparseVector
from backshift.core.weights import ParametricWeight
from backshift.errors import NeedDeeperSchedule, PreconditionError
from backshift.vectors.context import apply_T


def flagship_query(cfg):
    return VisitQuery(cfg.lam(), cfg.y0(), cfg.delta, int(cfg["n_star"]))


def family_query(cfg, mu):
    return VisitQuery(cfg.lam(), cfg.y0(), cfg.delta, int(cfg["n_star"]), mu=mu, y1=cfg.y1())


def test_return_set_of_zero():
    w = ParametricWeight(2)
    zero = SparseVector.zero()
    assert list(return_set(w, zero, zero, 1, range(11)).members_upto(10)) == list(range(11))


def test_return_set_of_unit_vector():
    w = ParametricWeight(2)
    target = SparseVector({1: w.exact_product(1, 4)})
    found = return_set(w, SparseVector.unit(5), target, Fraction(1, 10**9), IndexSet.from_list([4]))
    assert list(found.members_upto(4)) == [4]


def test_exponent_set_structure(flagship):
    cfg, ctx = flagship
    vq = flagship_query(cfg)
    levels = selected_levels(ctx.schedule, vq.n_star, vq.q0, _ball_selector(ctx, vq))
    exps = s_elements(ctx.schedule, levels)
    assert exps == sorted(set(exps))
    starts = {iv.lo - 1 for sl in levels for iv in ctx.schedule.level(sl.k)}
    assert set(exps) == starts
    assert schedule_S(ctx.schedule, vq.n_star, vq.q0, 3, _ball_selector(ctx, vq)) == exps[:3]
    with pytest.raises(NeedDeeperSchedule):
        schedule_S(ctx.schedule, vq.n_star, vq.q0, len(exps) + 1, _ball_selector(ctx, vq))


def test_flagship_visit(flagship):
    cfg, ctx = flagship
    vq = flagship_query(cfg)
    reports = certified_visits(ctx, vq, 3)
    assert all(r.passed for r in reports)
    delta = mpmath.mpf(vq.delta.numerator) / vq.delta.denominator
    assert all(r.final_distance < delta for r in reports)
    assert cross_check(ctx, vq, reports)


def test_single_entry_lambda_has_no_cross_terms(flagship):
    cfg, ctx = flagship
    vq = flagship_query(cfg)
    rep = certified_visits(ctx, vq, 1)[0]
    # the distinguished coordinate lies left of s', and no q > q0 contributes
    assert rep.terms[1] == 0
    assert rep.terms[2] == 0


def test_visit_preconditions(flagship):
    cfg, ctx = flagship
    vq = flagship_query(cfg)
    th = visit_thresholds(ctx, vq)
    with pytest.raises(PreconditionError):
        visit_certificate(ctx, vq, th.s0, th)
    with pytest.raises(PreconditionError):
        visit_certificate(ctx, vq, th.admissible[0] + 1, th)
    with pytest.raises(PreconditionError):
        VisitQuery({2: 2}, cfg.y0(), cfg.delta, 1)
    with pytest.raises(PreconditionError):
        VisitQuery({2: 1}, SparseVector({3: Fraction(1, 4)}), cfg.delta, 1)


def test_visit_report_json_is_deterministic(flagship):
    cfg, ctx = flagship
    vq = flagship_query(cfg)
    a = json.dumps(certified_visits(ctx, vq, 1)[0].to_json(), sort_keys=True)
    b = json.dumps(certified_visits(ctx, vq, 1)[0].to_json(), sort_keys=True)
    assert a == b


def test_visit_direct_distance_matches_target(flagship):
    cfg, ctx = flagship
    vq = flagship_query(cfg)
    rep = certified_visits(ctx, vq, 1)[0]
    assert rep.direct_distance <= rep.final_distance
    assert rep.final_distance <= rep.decomposition_bound + mpmath.mpf(10) ** -12


def test_non_fhc_on_flagship(flagship):
    cfg, ctx = flagship
    x0 = apply_T(ctx, cfg.lam())
    rep = non_fhc_certificate(ctx.schedule, x0)
    assert rep.passed
    by_level = {d.level: d for d in rep.densities}
    assert by_level[2].density >= Fraction(1, 2)
    assert by_level[5].density >= Fraction(4, 5)
    assert rep.structural.samples == 1000


def test_non_ufhc_on_v2(v2_isometry):
    cfg, ctx = v2_isometry
    x0 = apply_T(ctx, cfg.lam())
    rep = non_ufhc_certificate(ctx.schedule, x0)
    assert rep.passed
    assert {d.level: d for d in rep.densities}[3].density >= Fraction(2, 3)
    assert len(rep.min_location) == 3
    assert all(m["argmin"] == m["g"] for m in rep.min_location)
    floors = [d.floor for d in rep.densities]
    assert floors == sorted(floors)


def test_non_ufhc_needs_v2(flagship):
    cfg, ctx = flagship
    with pytest.raises(PreconditionError):
        non_ufhc_certificate(ctx.schedule, apply_T(ctx, cfg.lam()))


def test_coordinate_inside_carrier_is_excluded(flagship):
    cfg, ctx = flagship
    x0 = apply_T(ctx, cfg.lam())
    carrier = ctx.schedule.m_set()
    d = ctx.distinguished(2)
    assert d in carrier
    assert x0.coordinate(d) != 0


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5000), st.integers(0, 300), st.fractions(min_value=Fraction(1, 10), max_value=4))
def test_log_ratio_product_matches_direct(a, length, xi):
    b = a + length
    x = mpmath.mpf(xi.numerator) / xi.denominator
    direct = mpmath.fsum(mpmath.log(1 + x / j) for j in range(a, b + 1))
    assert abs(_log_ratio_product(a, b, x) - direct) < 1e-10


def test_family_window_quantities(v3_family):
    cfg, ctx = v3_family
    level = resolve_level(ctx, 1, 1, cfg.y1(), 2)
    assert lambda_r(ctx, level, 1, 2) == 0
    assert lambda_r(ctx, level, 1, Fraction(17, 8)) > 0
    for m in range(2, len(level.starts) + 1):
        assert gamma_rm(ctx, level, 1, m, Fraction(15, 8)) > 0
    grid = [lambda_r(ctx, level, 1, 2 + Fraction(t, 64)) for t in (1, 2, 4, 8)]
    assert grid == sorted(grid)


def test_delta_window(v3_family):
    cfg, ctx = v3_family
    vq = family_query(cfg, 2)
    level = resolve_level(ctx, 1, 1, cfg.y1(), 2)
    choice = find_delta_r(ctx, level, 1, 2, vq.delta, ctx.epsilon, _eta0_tilde(ctx, vq))
    assert 0 < choice.value < Fraction(1, 2)
    assert choice.refinement_passed


def test_v_sequence_for_mu_two(v3_family):
    cfg, ctx = v3_family
    vq = family_query(cfg, 2)
    seq = build_v_sequence(ctx, vq, 2, 1, _eta0_tilde(ctx, vq))
    assert len({c.r for c in seq}) == len(seq)
    assert all(abs(c.r - 2) < c.value for c in seq)


def test_v_sequence_beyond_built_levels(v3_family):
    cfg, ctx = v3_family
    vq = family_query(cfg, Fraction(3, 2))
    with pytest.raises(NeedDeeperSchedule):
        build_v_sequence(ctx, vq, Fraction(3, 2), 1, _eta0_tilde(ctx, vq))


def test_family_needs_v3(flagship):
    cfg, ctx = flagship
    with pytest.raises(PreconditionError):
        resolve_level(ctx, 1, 1, (Fraction(1, 2),), 2)
