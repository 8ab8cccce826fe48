"""Tail thresholds: the function theta and the family theta_r.

``theta(k)`` is the least index ``m >= k`` for which the certified bound on
``sum_{l >= m} ||w||**(k p) / (omega_1 ... omega_l)**p`` drops below ``2**-k``.
The thresholds ``||w||**(-k p) 2**-k`` shrink as ``k`` grows, so the least
admissible index is already nondecreasing; ``max(., k)`` keeps ``theta(k) >= k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from ..core.weights import ParametricWeight, WeightSequence, precision_for
from .._search import least_true
from ..errors import CannotCertify


def _log2(x) -> mpmath.mpf:
    x = Fraction(x)
    return mpmath.log(mpmath.mpf(x.numerator) / x.denominator, 2)


def least_tail_index(weight: WeightSequence, p, log2_numerator, log2_threshold, start: int = 1) -> int:
    """Least ``m >= start`` with ``log2_numerator + log2 tail(m) < log2_threshold``."""

    def ok(m: int) -> bool:
        with mpmath.workprec(precision_for(m, start) + 32):
            return log2_numerator + weight.log2_tail_mp(m, p) < log2_threshold

    found = least_true(ok, max(1, start))
    if found is None:
        raise CannotCertify("tail bound never drops below the threshold")
    return found


@dataclass
class ThetaFunction:
    """``theta`` for one weight and exponent, with a cache of computed values."""

    weight: WeightSequence
    p: Fraction
    cache: dict = field(default_factory=dict)

    def __post_init__(self):
        self.p = Fraction(self.p)

    def __call__(self, k: int) -> int:
        return compute_theta(self, k)

    def certified_log2_sum(self, k: int, m: int) -> mpmath.mpf:
        """Certified upper bound on log2 of the sum defining ``theta(k)``, from ``m``."""
        with mpmath.workprec(precision_for(k, m) + 32):
            p_mp = mpmath.mpf(self.p.numerator) / self.p.denominator
            return k * p_mp * _log2(self.weight.sup) + self.weight.log2_tail_mp(m, self.p)


def compute_theta(tf: ThetaFunction, k: int) -> int:
    """``theta(k)``: least certified index, at least ``k``."""
    if k < 1:
        raise ValueError("theta is defined on positive integers")
    if k in tf.cache:
        return tf.cache[k]
    with mpmath.workprec(precision_for(k) + 32):
        numerator = k * mpmath.mpf(tf.p.numerator) / tf.p.denominator * _log2(tf.weight.sup)
        # nearest cached value below k gives a valid starting point
        lower = [v for key, v in tf.cache.items() if key < k]
        start = max(lower) if lower else 1
        value = least_tail_index(tf.weight, tf.p, numerator, -k, start=start)
    value = max(value, k)
    tf.cache[k] = value
    return value


@dataclass
class ThetaFamily:
    """The thresholds ``theta_r(n)`` for the weights ``w_r``, ``r`` rational > 1.

    ``theta_r(n)`` is the least ``m >= n`` with a certified
    ``sum_{l >= m} (2 ||w_r||)**(n p) / prod_{i<=l} (1 + r/i)**p < 2**-(n + j)``,
    where ``j`` is the position of ``r`` in the enumeration of rationals above 1.
    """

    p: Fraction
    cache: dict = field(default_factory=dict)

    def __post_init__(self):
        self.p = Fraction(self.p)

    def __call__(self, r, j: int, n: int) -> int:
        return compute_theta_r(self, r, j, self.p, n)


def compute_theta_r(family: ThetaFamily, r, j: int, p, n: int) -> int:
    """``theta_{r_j}(n)`` with numerator ``(2(1+r))**(n p)`` and threshold ``2**-(n+j)``."""
    r = Fraction(r)
    p = Fraction(p)
    if r <= 1:
        raise ValueError("r must exceed 1")
    key = (r, j, n)
    if family is not None and p == family.p and key in family.cache:
        return family.cache[key]
    weight = ParametricWeight(r)
    with mpmath.workprec(precision_for(n, j) + 32):
        numerator = n * mpmath.mpf(p.numerator) / p.denominator * _log2(2 * (1 + r))
        value = least_tail_index(weight, p, numerator, -(n + j), start=n)
    if family is not None and p == family.p:
        family.cache[key] = value
    return value
