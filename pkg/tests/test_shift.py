from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from backshift.core.intervals import IntegerInterval
from backshift.core.sparse import SparseVector
from backshift.core.weights import DyadicWeight, ParametricWeight, TabulatedWeight
from backshift.errors import PreconditionError, ShapeError
from backshift.shift import apply_shift, distance_p, shift_block, shifted_coordinate, theta_embed

TWOS = TabulatedWeight([2], "periodic")


def close(x: SparseVector, y: SparseVector, tol=1e-10) -> bool:
    return float((x - y).p_norm_mp()) <= tol


def test_shift_kills_first_coordinate():
    assert apply_shift(ParametricWeight(2), SparseVector.unit(1), 1).entries == {}


def test_shift_with_constant_two():
    assert close(apply_shift(TWOS, SparseVector.unit(3), 2), SparseVector({1: 4}))


def test_shift_parametric_weight():
    assert close(apply_shift(ParametricWeight(2), SparseVector.unit(4), 1), SparseVector({3: Fraction(5, 3)}))


def test_negative_power_rejected():
    with pytest.raises(PreconditionError):
        apply_shift(TWOS, SparseVector.unit(1), -1)


def test_embed_interval_at_one():
    # starting at 1 every divisor is an empty product, so the block is the payload
    w = ParametricWeight(2)
    block = theta_embed(w, IntegerInterval(1, 2), (Fraction(1, 2), Fraction(1, 3))).realize()
    assert close(block, SparseVector({1: Fraction(1, 2), 2: Fraction(1, 3)}))


def test_embed_with_constant_two():
    block = theta_embed(TWOS, IntegerInterval(3, 4), (1, 1)).realize()
    assert close(block, SparseVector({3: Fraction(1, 4), 4: Fraction(1, 4)}))


def test_embed_zero_payload():
    assert theta_embed(TWOS, IntegerInterval(5, 5), (0,)).realize().entries == {}


def test_embed_length_mismatch():
    with pytest.raises(ShapeError):
        theta_embed(TWOS, IntegerInterval(5, 6), (1,))


@pytest.mark.parametrize("w", [ParametricWeight(2), DyadicWeight(), TWOS], ids=["mu2", "dyadic", "twos"])
def test_block_recovers_payload_at_its_start(w):
    iv = IntegerInterval(9, 12)
    x = (Fraction(1, 2), Fraction(-1, 3), Fraction(1, 5), Fraction(2, 7))
    block = theta_embed(w, iv, x)
    expected = SparseVector({s: v for s, v in enumerate(x, start=1)})
    assert close(shift_block(w, block, iv.lo - 1), expected)
    assert shift_block(w, block, iv.hi).entries == {}
    assert close(shift_block(w, block, 0), block.realize())


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 60), st.integers(1, 6), st.integers(0, 70), st.sampled_from(["mu2", "dyadic", "twos"]))
def test_block_formula_matches_direct_shift(lo, size, m, name):
    w = {"mu2": ParametricWeight(2), "dyadic": DyadicWeight(), "twos": TWOS}[name]
    iv = IntegerInterval(lo, lo + size - 1)
    x = tuple(Fraction(s, s + 3) for s in range(1, size + 1))
    block = theta_embed(w, iv, x)
    assert close(shift_block(w, block, m), apply_shift(w, block.realize(), m))


@settings(max_examples=60, deadline=None)
@given(
    st.dictionaries(st.integers(1, 80), st.fractions(-3, 3), min_size=1, max_size=6),
    st.integers(0, 40),
    st.integers(0, 40),
    st.sampled_from(["mu2", "dyadic"]),
)
def test_semigroup(entries, a, b, name):
    w = ParametricWeight(2) if name == "mu2" else DyadicWeight()
    x = SparseVector(entries)
    assert close(apply_shift(w, apply_shift(w, x, a), b), apply_shift(w, x, a + b))


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(st.integers(1, 50), st.fractions(-3, 3), min_size=1, max_size=6), st.integers(0, 50), st.integers(1, 5))
def test_shifted_coordinate_matches_full_shift(entries, m, k):
    w = ParametricWeight(Fraction(3, 2))
    x = SparseVector(entries)
    full = apply_shift(w, x, m).coordinate(k)
    assert abs(mpmath.mpf(shifted_coordinate(w, x, m, k)) - mpmath.mpf(full)) < 1e-12


def test_distance_examples():
    x = SparseVector({1: 1, 5: 2})
    assert distance_p(x, x) == 0
    assert distance_p(SparseVector.unit(1, p=1), SparseVector.unit(2, p=1)) == 2
    assert distance_p(SparseVector({1: 3}), SparseVector.zero()) == 3
