import json
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from backshift.config import load_config
from backshift.core.sparse import SparseVector
from backshift.errors import HorizonTooSmall, NotInPart, PreconditionError
from backshift.vectors.context import (
    ConstructionContext,
    apply_T,
    build_xq,
    check_part,
    find_index,
    isometry_report,
    lambda_norm,
    phi,
    vector_from_json,
    vector_to_json,
)
from backshift.vectors.enumeration import RationalBallEnumerator, enumerate_ball, rationals_of_height
from backshift.vectors.partition import PartitionMap


def test_first_ball_point_is_one_half():
    assert enumerate_ball(RationalBallEnumerator(1), 0) == (Fraction(1, 2),)


def test_height_order_in_dimension_one():
    e = RationalBallEnumerator(1)
    assert [e[i][0] for i in range(8)] == [Fraction(v) for v in ("1/2", "-1/2", "1/3", "-1/3", "1/4", "-1/4", "2/3", "-2/3")]


def test_rationals_of_height():
    assert rationals_of_height(1) == (Fraction(0),)
    assert set(rationals_of_height(4)) == {Fraction(1, 3), Fraction(-1, 3), Fraction(3), Fraction(-3)}


@pytest.mark.parametrize("n,p,field", [(1, 2, "real"), (2, 2, "real"), (3, 1, "real"), (2, Fraction(3, 2), "real"), (1, 2, "complex"), (2, 2, "complex")])
def test_enumeration_filters_and_is_injective(n, p, field):
    e = RationalBallEnumerator(n, p, field)
    exponent = mpmath.mpf(Fraction(p).numerator) / Fraction(p).denominator
    points = [e[i] for i in range(300)]
    assert len(set(points)) == len(points)
    for pt in points:
        scalars = e.as_scalars(pt)
        assert scalars[-1] != 0
        assert mpmath.fsum(abs(v) ** exponent for v in scalars) < 1


def test_enumeration_index_round_trip():
    e = RationalBallEnumerator(2)
    for i in random.Random(0).sample(range(2000), 100):
        assert e.index(e[i]) == i


def test_complex_enumeration_starts_with_imaginary_half():
    assert RationalBallEnumerator(1, 2, "complex")[0] == ((Fraction(0), Fraction(1, 2)),)


def test_partition_members_are_disjoint_and_ranked():
    part = PartitionMap("single")
    seen = set()
    for q in range(1, 21):
        members = part.members(q, 5)
        assert all(m < 10**7 for m in members)
        assert [part.rank_in(q, m) for m in members] == list(range(5))
        assert not seen & set(members)
        seen |= set(members)


def test_double_partition_members():
    cfg = load_config(preset="v3-family")
    part = PartitionMap("double", cfg.fibers().enumeration)
    seen = set()
    for q in (1, 2, 3):
        for r in (Fraction(2), Fraction(10**6), Fraction(3, 2)):
            members = part.members((q, r), 5)
            assert all(part.part_of(m) == (q, r) for m in members)
            assert not seen & set(members)
            seen |= set(members)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10**6))
def test_every_index_lies_in_exactly_its_part(i):
    part = PartitionMap("single")
    q = part.part_of(i)
    assert part.member(q, part.rank(i)) == i
    assert not part.contains(q + 1, i)


def test_not_in_part(flagship):
    _, ctx = flagship
    with pytest.raises(NotInPart):
        check_part(ctx, 2, PartitionMap("single").member(1, 0))
    with pytest.raises(NotInPart):
        phi(ctx, 1, 2, PartitionMap("single").member(1, 0))


def test_phi_find_index_round_trip(flagship):
    _, ctx = flagship
    rng = random.Random(1)
    for _ in range(100):
        q, t = rng.randint(1, 4), rng.randint(1, 200)
        i = PartitionMap("single").member(q, t - 1)
        assert find_index(ctx, 2, q, phi(ctx, 2, q, i)) == i


def test_phi_uses_triple_partition(v3_family):
    _, ctx = v3_family
    r = Fraction(2)
    i = ctx.partition.member((1, r), 0)
    assert phi(ctx, 1, 1, i, r) == ctx.enumerator(1)[0]
    with pytest.raises(PreconditionError):
        phi(ctx, 1, 1, i)


def test_vector_properties(flagship):
    _, ctx = flagship
    supports = []
    for q in (1, 2, 3):
        built = ctx.build(q)
        assert built.vector.coordinate(built.distinguished) == 1
        assert built.tilde.p_norm_mp() <= 1 + 1e-9
        supports.append(set(built.vector.support))
    assert not supports[0] & supports[1]
    assert not supports[1] & supports[2]


def test_vector_beyond_schedule(flagship):
    _, ctx = flagship
    with pytest.raises(HorizonTooSmall):
        ctx.distinguished(4)


def test_single_lambda_gives_its_vector(flagship):
    _, ctx = flagship
    x1, tail = build_xq(ctx, 1)
    assert ((apply_T(ctx, {1: 1}) - x1).p_norm_mp()) == 0
    assert tail >= 0


def test_zero_lambda(flagship):
    _, ctx = flagship
    assert apply_T(ctx, {}).entries == {}
    assert apply_T(ctx, [0, 0]).entries == {}


def test_lambda_beyond_cap(flagship):
    _, ctx = flagship
    with pytest.raises(PreconditionError):
        apply_T(ctx, {9: 1})


def test_single_entry_ratio_bound(v2_isometry):
    _, ctx = v2_isometry
    eps = ctx.epsilon
    for q in range(1, 9):
        ratio = apply_T(ctx, {q: 1}).p_norm_mp() / lambda_norm(ctx, {q: 1})
        assert 1 <= ratio <= mpmath.sqrt(1 + eps**2) + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.integers(1, 8), st.floats(-5, 5, allow_nan=False).filter(lambda v: abs(v) > 1e-6), min_size=1, max_size=8))
def test_isometry_bounds(lam):
    ctx = _v2_context()
    ratio = apply_T(ctx, lam).p_norm_mp() / lambda_norm(ctx, lam)
    assert 1 - 1e-9 <= ratio <= (1 + ctx.epsilon) + 1e-9


_CACHE = {}


def _v2_context() -> ConstructionContext:
    if "v2" not in _CACHE:
        _CACHE["v2"] = load_config(preset="v2-isometry").context()
    return _CACHE["v2"]


def test_isometry_report_is_deterministic(v2_isometry):
    _, ctx = v2_isometry
    a = isometry_report(ctx, 20, 8, seed=3).to_json()
    b = isometry_report(ctx, 20, 8, seed=3).to_json()
    assert a == b
    assert a["passed"]


def test_vector_json_round_trip(flagship):
    _, ctx = flagship
    x = ctx.build(1).vector
    text = json.dumps(vector_to_json(x), sort_keys=True)
    assert json.dumps(vector_to_json(vector_from_json(json.loads(text))), sort_keys=True) == text


def test_complex_context_builds(flagship):
    cfg, _ = flagship
    ctx = ConstructionContext(cfg.build_schedule(), field="complex", q_cap=2)
    x = ctx.build(1)
    assert x.vector.coordinate(x.distinguished) == 1
    assert x.tilde.p_norm_mp() <= 1 + 1e-9
