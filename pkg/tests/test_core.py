import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from backshift.core.density import density_at, density_profile
from backshift.core.intervals import IndexSet, IntegerInterval, IntervalProgression
from backshift.core.sparse import SparseVector, coordinate, p_norm
from backshift.core.weights import (
    DyadicWeight,
    ParametricWeight,
    TabulatedWeight,
    integer_mu_product,
    log_product,
    weight_at,
    weight_from_dict,
)
from backshift.errors import BoundExceeded, OutOfTable, PreconditionError, ShapeError


def test_weight_values():
    assert weight_at(ParametricWeight(2), 1) == 3
    assert weight_at(ParametricWeight(2), 4) == Fraction(3, 2)
    assert weight_at(TabulatedWeight([2, 2, 2]), 2) == 2


def test_table_without_extension_raises():
    with pytest.raises(OutOfTable):
        TabulatedWeight([2, 2, 2]).at(4)


def test_empty_product_is_zero_log():
    for w in (ParametricWeight(2), TabulatedWeight([2, 2, 2]), DyadicWeight()):
        assert log_product(w, 5, 4) == 0


def test_tabulated_log_product():
    assert log_product(TabulatedWeight([2, 2, 2]), 1, 3) == pytest.approx(math.log(8), abs=1e-12)


@pytest.mark.parametrize("ell", range(1, 21))
def test_parametric_log_product_telescopes(ell):
    direct = math.prod(1 + 2 / j for j in range(1, ell + 1))
    assert log_product(ParametricWeight(2), 1, ell) == pytest.approx(math.log((ell + 1) * (ell + 2) / 2), abs=1e-12)
    assert log_product(ParametricWeight(2), 1, ell) == pytest.approx(math.log(direct), abs=1e-12)


def test_integer_mu_product_exact():
    # prod_{j=3}^{5} (1 + 2/j) = (5/3)(6/4)(7/5)
    assert integer_mu_product(2, 3, 5) == Fraction(5, 3) * Fraction(6, 4) * Fraction(7, 5)


@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=Fraction(1, 10), max_value=5), st.integers(1, 400), st.integers(0, 400))
def test_parametric_log_product_matches_direct_sum(mu, a, length):
    w = ParametricWeight(mu)
    b = a + length
    direct = mpmath.fsum(mpmath.log(1 + mpmath.mpf(mu.numerator) / mu.denominator / j) for j in range(a, b + 1))
    assert abs(w.log_product(a, b) - float(direct)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3000), st.integers(0, 3000))
def test_dyadic_log_product_matches_direct_sum(a, length):
    w = DyadicWeight()
    b = a + length
    direct = math.fsum(math.log(w.at(j)) for j in range(a, b + 1))
    assert abs(w.log_product(a, b) - direct) < 1e-10 * max(1, abs(direct))


def test_weight_round_trip():
    for w in (ParametricWeight(Fraction(3, 2)), TabulatedWeight([1, 2], "periodic"), DyadicWeight()):
        again = weight_from_dict(w.to_dict())
        assert [again.at(k) for k in range(1, 30)] == [w.at(k) for k in range(1, 30)]


def test_parametric_weight_needs_positive_terms():
    with pytest.raises(PreconditionError):
        ParametricWeight(-2)


def test_density_examples():
    evens = IndexSet.from_predicate(lambda n: n % 2 == 0, 10**4)
    assert density_at(evens, 1000) == Fraction(501, 1001)
    assert density_at(IndexSet.from_list([], 10), 10) == 0
    thirds = IndexSet.from_predicate(lambda n: n % 3 == 0, 100)
    assert density_at(thirds, 8) == Fraction(3, 9)


def test_density_profile_examples():
    evens = IndexSet.from_predicate(lambda n: n % 2 == 0, 10**4)
    assert density_profile(evens, [9, 99, 999]).values == (Fraction(5, 10), Fraction(50, 100), Fraction(500, 1000))
    assert density_profile(IndexSet.from_list(range(5), 10), [4, 9]).values == (Fraction(1, 1), Fraction(1, 2))


def test_density_profile_needs_sorted_checkpoints():
    with pytest.raises(PreconditionError):
        density_profile(IndexSet.from_list([1]), [5, 2])


def test_index_set_bound_is_enforced():
    with pytest.raises(BoundExceeded):
        IndexSet.from_list([1, 2, 3]).count_upto(10)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 300), max_size=40), st.integers(0, 300))
def test_complement_counts_add_up(values, n):
    a = IndexSet.from_list(values, 300)
    assert a.count_upto(n) + a.complement().count_upto(n) == n + 1
    assert a.count_upto(n) == sum(1 for v in set(values) if v <= n)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 50), st.integers(1, 5), st.integers(0, 6), st.integers(1, 10), st.integers(0, 400))
def test_progression_count_matches_enumeration(lo, size, extra, count, n):
    step = size + extra
    pr = IntervalProgression(IntegerInterval(lo, lo + size - 1), step, count)
    members = {pr.interval(u).lo + t for u in range(count) for t in range(size)}
    s = IndexSet.from_progressions([pr], 10**4)
    assert s.count_upto(n) == sum(1 for m in members if m <= n)


def test_interval_rejects_bad_bounds():
    with pytest.raises(PreconditionError):
        IntegerInterval(3, 2)
    with pytest.raises(PreconditionError):
        IntegerInterval(0, 2)


def test_norm_examples():
    assert p_norm(SparseVector.unit(3)) == 1
    assert p_norm(SparseVector({1: 2, 2: 2}, p=1)) == 4
    assert p_norm(SparseVector({1: 3, 4: 4})) == 5
    assert coordinate(SparseVector({1: 3, 4: 4}), 2) == 0


def test_sparse_rejects_index_zero():
    with pytest.raises(ShapeError):
        SparseVector({0: 1})


def test_sparse_json_round_trip():
    x = SparseVector({1: Fraction(1, 3), 7: -2})
    y = SparseVector.from_json(x.to_json())
    assert (x - y).p_norm() == 0


@settings(max_examples=60, deadline=None)
@given(
    st.dictionaries(st.integers(1, 30), st.floats(-10, 10, allow_nan=False), max_size=8),
    st.dictionaries(st.integers(1, 30), st.floats(-10, 10, allow_nan=False), max_size=8),
)
def test_triangle_inequality(a, b):
    x, y = SparseVector(a), SparseVector(b)
    assert (x + y).p_norm() <= x.p_norm() + y.p_norm() + 1e-9
