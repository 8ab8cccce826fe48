"""Weight sequences and numerically stable products of weights.

Three kinds are provided:

* :class:`ParametricWeight` -- the family ``w_mu = (1 + mu/n)``.
* :class:`TabulatedWeight` -- a finite table with an optional constant or
  periodic extension.
* :class:`DyadicWeight` -- weights in ``{c, 1/c}`` (``c = 2**b``) arranged on
  dyadic segments so that every product is an integer power of ``c``.  The
  partial products grow roughly like ``c**(n/2)`` while every segment ends with
  a long stretch of alternating ``c, 1/c``; this keeps the tail thresholds
  linear in their argument and makes desk-scale schedules feasible.

Products are carried in log space.  Methods ending in ``_mp`` return
``mpmath.mpf`` values so that astronomically small tails (``4**-7000``) and
ranges with indices near ``10**30`` stay representable.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath

from ..errors import CannotCertify, OutOfTable, PreconditionError

LN2 = math.log(2.0)
# Decision margin for inequalities that can only be evaluated in log space.
LOG_MARGIN = 1e-9
# Windows up to this length are re-checked with exact rationals near a tie.
EXACT_WINDOW = 4096
# Explicit terms summed before the analytic remainder of a parametric tail.
TAIL_TERMS = 64
# Integer mu up to this size use exact telescoping instead of log-gamma.
TELESCOPE_LIMIT = 64
_SCALE_BITS = 96


def precision_for(*values) -> int:
    """Working precision (bits) adequate for sums of logs at these indices."""
    width = max((abs(int(v)).bit_length() for v in values), default=1)
    return 80 + 2 * width


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, float)):
        return Fraction(x)
    return Fraction(str(x))


def _log2_of_sum(terms) -> mpmath.mpf:
    total = mpmath.fsum(terms)
    if total <= 0:
        return mpmath.ninf
    return mpmath.log(total, 2)


def integer_mu_product(mu: int, a: int, b: int) -> Fraction:
    """Exact ``prod_{j=a}^{b} (1 + mu/j)`` for integer ``mu`` by telescoping.

    ``prod (j + mu)/j`` collapses to ``prod_{t=1}^{mu} (b + t)/(a + t - 1)``.
    """
    if b < a:
        return Fraction(1)
    if a < 1:
        raise PreconditionError("products start at index 1")
    num = 1
    den = 1
    for t in range(1, mu + 1):
        num *= b + t
        den *= a + t - 1
    return Fraction(num, den)


class WeightSequence:
    """A bounded sequence of positive weights ``omega_1, omega_2, ...``."""

    kind = "abstract"

    def at(self, k: int):
        raise NotImplementedError

    @property
    def sup(self):
        """``||w||_inf``."""
        raise NotImplementedError

    def inf_estimate(self, probe_bound: int):
        """Infimum of the weights, exact where the kind allows it."""
        raise NotImplementedError

    def log_product_mp(self, a: int, b: int) -> mpmath.mpf:
        """``sum_{j=a}^{b} log omega_j`` as an mpf; 0 when ``b < a``."""
        raise NotImplementedError

    def log_product(self, a: int, b: int) -> float:
        """``sum_{j=a}^{b} log omega_j`` as a float; 0 when ``b < a``."""
        if b < a:
            return 0.0
        with mpmath.workprec(precision_for(a, b)):
            return float(self.log_product_mp(a, b))

    def product_mp(self, a: int, b: int) -> mpmath.mpf:
        """``prod_{j=a}^{b} omega_j`` rounded to the caller's working precision."""
        if b < a:
            return mpmath.mpf(1)
        with mpmath.workprec(precision_for(a, b)):
            value = mpmath.exp(self.log_product_mp(a, b))
        return +value

    def max_suffix_log_mp(self, k: int, n: int) -> mpmath.mpf:
        """``max_{k < u <= k+n} sum_{j=u}^{k+n} log omega_j`` (``n >= 1``)."""
        raise NotImplementedError

    def max_suffix_log(self, k: int, n: int) -> float:
        with mpmath.workprec(precision_for(k, k + n)):
            return float(self.max_suffix_log_mp(k, n))

    def max_suffix_product_exact(self, k: int, n: int) -> Fraction:
        """Exact maximum suffix product; only sensible for short windows."""
        best = None
        acc = Fraction(1)
        for u in range(k + n, k, -1):
            acc *= _as_fraction(self.at(u))
            if best is None or acc > best:
                best = acc
        return best

    def suffix_bound_holds(self, k: int, n: int, beta) -> bool | None:
        """Decide ``max suffix product over (k, k+n] <= beta``.

        Returns ``None`` when the log-space value sits inside the decision
        margin and no exact fallback applies.
        """
        if n < 1:
            return True
        with mpmath.workprec(precision_for(k, k + n)):
            value = self.max_suffix_log_mp(k, n)
            bound = mpmath.log(mpmath.mpf(_as_fraction(beta).numerator) / _as_fraction(beta).denominator)
            gap = float(value - bound)
        if gap < -LOG_MARGIN:
            return True
        if gap > LOG_MARGIN:
            return False
        if n <= EXACT_WINDOW:
            return self.max_suffix_product_exact(k, n) <= _as_fraction(beta)
        return None

    def log2_tail_mp(self, m: int, p) -> mpmath.mpf:
        """Certified upper bound on ``log2 sum_{l >= m} (omega_1...omega_l)**-p``."""
        raise CannotCertify(f"no tail certificate for {self.kind} weights")

    def series_verdict(self, p) -> str:
        """'converges', 'diverges' or 'unknown' for ``sum (omega_1...omega_l)**-p``."""
        return "unknown"

    def to_dict(self) -> dict:
        raise NotImplementedError


class ParametricWeight(WeightSequence):
    """``omega_n = 1 + mu/n`` with rational ``mu > 0``."""

    kind = "parametric"

    def __init__(self, mu):
        mu = _as_fraction(mu)
        if mu <= 0:
            raise PreconditionError("mu must be positive")
        self.mu = mu

    def __repr__(self):
        return f"ParametricWeight(mu={self.mu})"

    def __eq__(self, other):
        return isinstance(other, ParametricWeight) and other.mu == self.mu

    def __hash__(self):
        return hash(("parametric", self.mu))

    def at(self, k: int) -> Fraction:
        if k < 1:
            raise PreconditionError("weights are indexed from 1")
        return 1 + self.mu / k

    @property
    def sup(self) -> Fraction:
        return 1 + self.mu

    def inf_estimate(self, probe_bound: int) -> Fraction:
        # omega_n decreases to 1, so the infimum is the limit.
        return Fraction(1)

    def _is_integer(self) -> bool:
        return self.mu.denominator == 1

    def _telescopes(self) -> bool:
        return self._is_integer() and self.mu <= TELESCOPE_LIMIT

    def log_product_mp(self, a: int, b: int) -> mpmath.mpf:
        if b < a:
            return mpmath.mpf(0)
        if a < 1:
            raise PreconditionError("products start at index 1")
        mu = self.mu
        if self._telescopes():
            m = int(mu)
            num = 1
            den = 1
            for t in range(1, m + 1):
                num *= b + t
                den *= a + t - 1
            return mpmath.log(num) - mpmath.log(den)
        mu_mp = mpmath.mpf(mu.numerator) / mu.denominator
        if b - a < 32:
            return mpmath.fsum(mpmath.log1p(mu_mp / j) for j in range(a, b + 1))
        # prod_{j=a}^{b} (1 + mu/j) = Gamma(b+1+mu) Gamma(a) / (Gamma(a+mu) Gamma(b+1))
        lg = mpmath.loggamma
        return lg(b + 1 + mu_mp) - lg(b + 1) - lg(a + mu_mp) + lg(a)

    def max_suffix_log_mp(self, k: int, n: int) -> mpmath.mpf:
        # Every factor exceeds 1, so the longest suffix is the largest.
        return self.log_product_mp(k + 1, k + n)

    def exact_product(self, a: int, b: int) -> Fraction:
        if self._telescopes():
            return integer_mu_product(int(self.mu), a, b)
        acc = Fraction(1)
        for j in range(a, b + 1):
            acc *= 1 + self.mu / j
        return acc

    def max_suffix_product_exact(self, k: int, n: int) -> Fraction:
        return self.exact_product(k + 1, k + n)

    def suffix_bound_holds(self, k: int, n: int, beta) -> bool | None:
        if n >= 1 and self._telescopes():
            return self.exact_product(k + 1, k + n) <= _as_fraction(beta)
        return super().suffix_bound_holds(k, n, beta)

    def log2_tail_mp(self, m: int, p) -> mpmath.mpf:
        """Partial sum of ``TAIL_TERMS`` terms plus an analytic remainder.

        For ``l >= M``, ``log(1 + x) >= x/(1 + x)`` gives
        ``P(l)/P(M) >= ((l + 1 + mu)/(M + 1 + mu))**mu``, hence
        ``sum_{l >= M} P(l)**-p <= P(M)**-p * (1 + (M + 1 + mu)/(mu*p - 1))``.
        """
        if m < 1:
            raise PreconditionError("tails start at index 1")
        p_mp = mpmath.mpf(_as_fraction(p).numerator) / _as_fraction(p).denominator
        mu_mp = mpmath.mpf(self.mu.numerator) / self.mu.denominator
        if mu_mp * p_mp <= 1:
            raise CannotCertify(f"series diverges for mu*p = {float(mu_mp * p_mp)} <= 1")
        big_m = m + TAIL_TERMS
        with mpmath.workprec(precision_for(big_m)):
            log_p = self.log_product_mp(1, m)
            terms = []
            for ell in range(m, big_m):
                terms.append(mpmath.exp(-p_mp * log_p))
                log_p += mpmath.log1p(mu_mp / (ell + 1))
            factor = 1 + (big_m + 1 + mu_mp) / (mu_mp * p_mp - 1)
            terms.append(mpmath.exp(-p_mp * log_p) * factor)
            return _log2_of_sum(terms)

    def series_verdict(self, p) -> str:
        return "converges" if self.mu * _as_fraction(p) > 1 else "diverges"

    def to_dict(self) -> dict:
        return {"kind": "parametric", "mu": str(self.mu)}


class TabulatedWeight(WeightSequence):
    """Weights read from a table, optionally extended by a constant or periodically.

    ``extension`` is ``None`` (reading past the table raises
    :class:`OutOfTable`), ``"constant"`` (requires ``constant``) or
    ``"periodic"`` (the table repeats with period ``len(values)``).
    """

    kind = "tabulated"

    def __init__(self, values, extension: str | None = None, constant=None):
        if not values:
            raise PreconditionError("empty weight table")
        self.values = [_as_fraction(v) for v in values]
        if any(v <= 0 for v in self.values):
            raise PreconditionError("weights must be positive")
        if extension not in (None, "constant", "periodic"):
            raise PreconditionError(f"unknown extension rule {extension!r}")
        if extension == "constant":
            if constant is None or _as_fraction(constant) <= 0:
                raise PreconditionError("constant extension needs a positive constant")
            self.constant = _as_fraction(constant)
        else:
            self.constant = None
        self.extension = extension
        with mpmath.workprec(_SCALE_BITS + 64):
            scaled = [self._scaled_log(v) for v in self.values]
            self._const_scaled = self._scaled_log(self.constant) if self.constant else 0
        prefix = [0]
        for s in scaled:
            prefix.append(prefix[-1] + s)
        self._prefix = prefix

    @staticmethod
    def _scaled_log(v: Fraction) -> int:
        value = mpmath.log(mpmath.mpf(v.numerator) / v.denominator)
        return int(mpmath.nint(mpmath.ldexp(value, _SCALE_BITS)))

    def __repr__(self):
        return f"TabulatedWeight(len={len(self.values)}, extension={self.extension!r})"

    @property
    def length(self) -> int:
        return len(self.values)

    def at(self, k: int) -> Fraction:
        if k < 1:
            raise PreconditionError("weights are indexed from 1")
        n = self.length
        if k <= n:
            return self.values[k - 1]
        if self.extension == "constant":
            return self.constant
        if self.extension == "periodic":
            return self.values[(k - 1) % n]
        raise OutOfTable(f"index {k} beyond table of length {n}")

    @property
    def sup(self) -> Fraction:
        top = max(self.values)
        if self.constant is not None:
            top = max(top, self.constant)
        return top

    def inf_estimate(self, probe_bound: int) -> Fraction:
        n = self.length
        if self.extension is None:
            return min(self.values[: max(1, min(probe_bound, n))])
        if self.extension == "periodic":
            return min(self.values[: max(1, min(probe_bound, n))])
        low = min(self.values[: max(1, min(probe_bound, n))])
        if probe_bound > n:
            low = min(low, self.constant)
        return low

    def _prefix_scaled(self, x: int) -> int:
        """Scaled ``sum_{j=1}^{x} log omega_j``."""
        n = self.length
        if x <= n:
            return self._prefix[x]
        if self.extension == "constant":
            return self._prefix[n] + (x - n) * self._const_scaled
        if self.extension == "periodic":
            q, r = divmod(x, n)
            return q * self._prefix[n] + self._prefix[r]
        raise OutOfTable(f"index {x} beyond table of length {n}")

    def _scaled_to_mp(self, value: int) -> mpmath.mpf:
        with mpmath.workprec(max(64, abs(value).bit_length() + 64)):
            out = mpmath.ldexp(mpmath.mpf(value), -_SCALE_BITS)
        return +out

    def log_product_mp(self, a: int, b: int) -> mpmath.mpf:
        if b < a:
            return mpmath.mpf(0)
        return self._scaled_to_mp(self._prefix_scaled(b) - self._prefix_scaled(a - 1))

    def log_product(self, a: int, b: int) -> float:
        if b < a:
            return 0.0
        diff = self._prefix_scaled(b) - self._prefix_scaled(a - 1)
        return math.ldexp(float(diff), -_SCALE_BITS) if abs(diff).bit_length() < 1000 else float(self._scaled_to_mp(diff))

    def _min_prefix(self, lo: int, hi: int) -> int:
        """Minimum of the scaled prefix over ``[lo, hi]``."""
        n = self.length
        if hi - lo <= 2 * n + 2 or self.extension is None:
            return min(self._prefix_scaled(x) for x in range(lo, hi + 1))
        if self.extension == "periodic":
            period = self._prefix[n]
            if period >= 0:
                return min(self._prefix_scaled(x) for x in range(lo, lo + n))
            return min(self._prefix_scaled(x) for x in range(hi - n + 1, hi + 1))
        # constant extension: brute force on the table, linear beyond it
        best = None
        if lo <= n:
            best = min(self._prefix_scaled(x) for x in range(lo, min(hi, n) + 1))
        start = max(lo, n)
        edge = self._prefix_scaled(start) if self._const_scaled >= 0 else self._prefix_scaled(hi)
        return edge if best is None else min(best, edge)

    def max_suffix_log_mp(self, k: int, n: int) -> mpmath.mpf:
        end = k + n
        top = self._prefix_scaled(end) - self._min_prefix(k, end - 1)
        return self._scaled_to_mp(top)

    def _tail_terms(self, start: int, stop: int, p_mp) -> list:
        out = []
        for ell in range(start, stop):
            out.append(mpmath.exp(-p_mp * self._scaled_to_mp(self._prefix_scaled(ell))))
        return out

    def log2_tail_mp(self, m: int, p) -> mpmath.mpf:
        """Exact geometric tails for constant (``c > 1``) or periodic extensions."""
        if m < 1:
            raise PreconditionError("tails start at index 1")
        p_mp = mpmath.mpf(_as_fraction(p).numerator) / _as_fraction(p).denominator
        n = self.length
        with mpmath.workprec(precision_for(m + n)):
            if self.extension == "constant" and self.constant > 1:
                ratio = mpmath.exp(-p_mp * self._scaled_to_mp(self._const_scaled))
                start = max(m, n)
                terms = self._tail_terms(m, start, p_mp) if m < n else []
                head = mpmath.exp(-p_mp * self._scaled_to_mp(self._prefix_scaled(start)))
                terms.append(head / (1 - ratio))
                return _log2_of_sum(terms)
            if self.extension == "periodic" and self._prefix[n] > 0:
                ratio = mpmath.exp(-p_mp * self._scaled_to_mp(self._prefix[n]))
                terms = self._tail_terms(m, m + n, p_mp)
                return _log2_of_sum(terms) - mpmath.log(1 - ratio, 2)
        raise CannotCertify("tail certifiable only for constant c > 1 or periodic growth")

    def series_verdict(self, p) -> str:
        if self.extension == "constant":
            return "converges" if self.constant > 1 else "diverges"
        if self.extension == "periodic":
            return "converges" if self._prefix[self.length] > 0 else "diverges"
        return "unknown"

    def to_dict(self) -> dict:
        out = {"kind": "tabulated", "values": [str(v) for v in self.values], "extension": self.extension}
        if self.constant is not None:
            out["constant"] = str(self.constant)
        return out


class DyadicWeight(WeightSequence):
    """Weights in ``{c, 1/c}`` with ``c = 2**b`` laid out on dyadic segments.

    Indices below ``2**m0`` carry ``c``.  For ``m >= m0`` the segment
    ``[2**m, 2**(m+1))`` carries ``c`` on its first half and alternates
    ``c, 1/c, c, 1/c, ...`` on its second half.  Every partial product is
    ``c**E(x)`` for an integer exponent ``E`` with a closed form.
    """

    kind = "dyadic"

    def __init__(self, b: int = 2, m0: int = 2):
        if b < 1 or m0 < 2:
            raise PreconditionError("need b >= 1 and m0 >= 2")
        self.b = int(b)
        self.m0 = int(m0)
        self.c = 2 ** self.b

    def __repr__(self):
        return f"DyadicWeight(b={self.b}, m0={self.m0})"

    def __eq__(self, other):
        return isinstance(other, DyadicWeight) and (other.b, other.m0) == (self.b, self.m0)

    def __hash__(self):
        return hash(("dyadic", self.b, self.m0))

    def _segment_base(self, m: int) -> int:
        """``E(2**m - 1)`` for ``m >= m0``."""
        return 2 ** (m - 1) + 2 ** (self.m0 - 1) - 1

    def exponent(self, x: int) -> int:
        """``E(x)`` with ``omega_1 ... omega_x = c**E(x)``."""
        if x < 0:
            raise PreconditionError("negative index")
        if x < 2 ** self.m0:
            return x
        m = x.bit_length() - 1
        h = 1 << m
        base = self._segment_base(m)
        t = x - h + 1
        half = h >> 1
        if t <= half:
            return base + t
        return base + half + ((t - half) & 1)

    def step(self, j: int) -> int:
        """``+1`` if ``omega_j = c`` and ``-1`` if ``omega_j = 1/c``."""
        return self.exponent(j) - self.exponent(j - 1)

    def at(self, k: int) -> Fraction:
        if k < 1:
            raise PreconditionError("weights are indexed from 1")
        return Fraction(self.c) if self.step(k) > 0 else Fraction(1, self.c)

    @property
    def sup(self) -> Fraction:
        return Fraction(self.c)

    def inf_estimate(self, probe_bound: int) -> Fraction:
        if probe_bound >= 2 ** (self.m0 + 1):
            return Fraction(1, self.c)
        return min(self.at(k) for k in range(1, probe_bound + 1))

    def log_product_mp(self, a: int, b: int) -> mpmath.mpf:
        if b < a:
            return mpmath.mpf(0)
        return (self.exponent(b) - self.exponent(a - 1)) * self.b * mpmath.log(2)

    def log_product(self, a: int, b: int) -> float:
        if b < a:
            return 0.0
        return float(self.exponent(b) - self.exponent(a - 1)) * self.b * LN2

    def product_mp(self, a: int, b: int) -> mpmath.mpf:
        if b < a:
            return mpmath.mpf(1)
        return mpmath.ldexp(mpmath.mpf(1), (self.exponent(b) - self.exponent(a - 1)) * self.b)

    def max_suffix_exponent(self, k: int, n: int) -> int:
        """Exact exponent of the maximum suffix product over ``(k, k+n]``.

        ``E(x + 2) >= E(x)`` always holds, so the minimum of ``E`` over
        ``[k, k+n-1]`` is attained at ``k`` or ``k+1``.
        """
        end = k + n
        low = self.exponent(k)
        if k + 1 <= end - 1:
            low = min(low, self.exponent(k + 1))
        return self.exponent(end) - low

    def max_suffix_log_mp(self, k: int, n: int) -> mpmath.mpf:
        return self.max_suffix_exponent(k, n) * self.b * mpmath.log(2)

    def suffix_bound_holds(self, k: int, n: int, beta) -> bool:
        if n < 1:
            return True
        power = self.max_suffix_exponent(k, n) * self.b
        beta = _as_fraction(beta)
        if abs(power) <= 4096:
            return Fraction(2) ** power <= beta
        # far from any tie for the modest beta values used in practice
        return power < 0

    def log2_tail_mp(self, m: int, p) -> mpmath.mpf:
        """Exact sums over whole runs, then a remainder after three segments.

        From a segment start ``s`` the exponent gains at least half the index
        distance, so ``sum_{l >= s} c**(-p E(l)) <= c**(-p E(s-1)) * q/(1 - q)``
        with ``q = c**(-p/2)``.
        """
        if m < 1:
            raise PreconditionError("tails start at index 1")
        p_mp = mpmath.mpf(_as_fraction(p).numerator) / _as_fraction(p).denominator
        with mpmath.workprec(precision_for(m) + 32):
            bp = self.b * p_mp
            ratio = mpmath.power(2, -bp)

            def term(e):
                return mpmath.power(2, -bp * e)

            terms = []
            ell = m
            segments = 0
            while True:
                if ell < 2 ** self.m0:
                    stop = 2 ** self.m0
                    length = stop - ell
                    terms.append(term(self.exponent(ell)) * (1 - ratio ** length) / (1 - ratio))
                    ell = stop
                    segments += 1
                else:
                    mseg = ell.bit_length() - 1
                    h = 1 << mseg
                    flat = h + (h >> 1)
                    if ell < flat:
                        length = flat - ell
                        terms.append(term(self.exponent(ell)) * (1 - ratio ** length) / (1 - ratio))
                        ell = flat
                    length = 2 * h - ell
                    first = self.exponent(ell)
                    second = self.exponent(ell + 1) if length > 1 else first
                    terms.append(term(first) * ((length + 1) // 2) + term(second) * (length // 2))
                    ell = 2 * h
                    segments += 1
                if segments >= 4:
                    break
            half = mpmath.power(2, -bp / 2)
            terms.append(term(self.exponent(ell - 1)) * half / (1 - half))
            return _log2_of_sum(terms)

    def series_verdict(self, p) -> str:
        return "converges"

    def to_dict(self) -> dict:
        return {"kind": "dyadic", "b": self.b, "m0": self.m0}


def weight_at(w: WeightSequence, k: int):
    """``omega_k``; exact for parametric and dyadic kinds."""
    return w.at(k)


def log_product(w: WeightSequence, a: int, b: int) -> float:
    """``sum_{j=a}^{b} log omega_j``; 0 for the empty range ``b < a``."""
    return w.log_product(a, b)


def weight_from_dict(spec: dict) -> WeightSequence:
    """Inverse of ``to_dict`` for all three kinds."""
    kind = spec.get("kind")
    if kind == "parametric":
        return ParametricWeight(Fraction(str(spec["mu"])))
    if kind == "tabulated":
        const = spec.get("constant")
        return TabulatedWeight(
            [Fraction(str(v)) for v in spec["values"]],
            extension=spec.get("extension"),
            constant=Fraction(str(const)) if const is not None else None,
        )
    if kind == "dyadic":
        return DyadicWeight(int(spec.get("b", 2)), int(spec.get("m0", 2)))
    raise PreconditionError(f"unknown weight kind {kind!r}")
