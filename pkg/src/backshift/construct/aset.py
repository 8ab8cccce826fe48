"""The sets of indices with bounded suffix products, the constant beta and the weight check.

``k`` belongs to ``A(N, beta)`` when every suffix product of the window
``omega_{k+1} ... omega_{k+N}`` is at most ``beta``:
``max_{k < u <= k+N} prod_{j=u}^{k+N} omega_j <= beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .._search import least_true
from ..core.weights import DyadicWeight, ParametricWeight, TabulatedWeight, WeightSequence, precision_for
from ..errors import Insufficient, PreconditionError
from .good_interval import find_good_interval


@dataclass(frozen=True)
class BetaChoice:
    """``beta = max(||w||_inf, 1/inf omega)``, or a configured value when the infimum vanishes."""

    value: Fraction
    sup: Fraction
    inf: Fraction
    inf_zero: bool = False


def beta_for_weight(w: WeightSequence, probe_bound: int = 10**4, floor=None, arbitrary=2) -> BetaChoice:
    """Choose ``beta`` for ``w``; ``floor`` switches to ``arbitrary`` when the estimated infimum is below it."""
    if probe_bound < 1:
        raise PreconditionError("probe_bound must be positive")
    sup = Fraction(w.sup)
    inf = Fraction(w.inf_estimate(probe_bound))
    if floor is not None and inf < Fraction(floor):
        return BetaChoice(Fraction(arbitrary), sup, inf, True)
    return BetaChoice(max(sup, 1 / inf), sup, inf)


def is_a_member(w: WeightSequence, n: int, beta, k: int) -> bool | None:
    """Membership of ``k`` in ``A(n, beta)``; ``None`` inside the log-space margin."""
    if n < 1:
        raise PreconditionError("N must be positive")
    return w.suffix_bound_holds(k, n, beta)


def _dyadic_candidates(w: DyadicWeight, n: int, beta, start: int):
    """Candidate minimal members: the start itself and the entry of each flat run."""
    beta = Fraction(beta)
    # largest exponent with c**x <= beta
    slack = math.floor(math.log(beta) / math.log(w.c) + 1e-12) if beta > 0 else -1
    while Fraction(w.c) ** (slack + 1) <= beta:
        slack += 1
    while slack >= 0 and Fraction(w.c) ** slack > beta:
        slack -= 1
    reach = max(slack, 0) + 3
    yield from range(start, start + reach + 1)
    m = max(w.m0, start.bit_length() - 1)
    while True:
        h = 1 << m
        flat = h + (h >> 1)
        if (h >> 1) + reach >= n - 1:
            for cand in range(flat - reach, flat + 2):
                if cand >= start:
                    yield cand
        m += 1
        if m > 8192:
            return


def next_a_member(w: WeightSequence, n: int, beta, start: int, limit: int | None = None) -> int | None:
    """Least member of ``A(n, beta)`` that is ``>= start`` (``None`` if none below ``limit``)."""
    start = max(1, int(start))
    beta = Fraction(beta)

    def member(k: int) -> bool:
        return bool(is_a_member(w, n, beta, k))

    if isinstance(w, ParametricWeight):
        # window products decrease in k towards 1
        if beta <= 1:
            return None
        found = least_true(member, start)
        if found is not None and limit is not None and found > limit:
            return None
        return found
    if isinstance(w, DyadicWeight):
        best = None
        for cand in _dyadic_candidates(w, n, beta, start):
            if best is not None and cand >= best:
                if cand > best + 4 * n + 8:
                    break
                continue
            if limit is not None and cand > limit:
                break
            if member(cand):
                best = cand
        return best
    stop = limit if limit is not None else start + 10**6
    for k in range(start, stop + 1):
        if member(k):
            return k
    return None


def a_set_members(w: WeightSequence, n: int, beta, search_bound: int, want: int) -> list:
    """The first ``want`` members of ``A(n, beta)`` not exceeding ``search_bound``."""
    if n < 1 or Fraction(beta) <= 0:
        raise PreconditionError("need N >= 1 and beta > 0")
    found = []
    k = 1
    while len(found) < want:
        nxt = next_a_member(w, n, beta, k, limit=search_bound)
        if nxt is None or nxt > search_bound:
            break
        found.append(nxt)
        k = nxt + 1
    if len(found) < want:
        raise Insufficient(f"found {len(found)} of {want} members below {search_bound}", found)
    return found


def window_member(w: WeightSequence, n: int, beta, k_prime: int) -> int | None:
    """A member of ``A(n, beta)`` inside ``[k', k' + 2**m]`` with ``m = max(n, 7)``.

    Requires the full window ``omega_{k'+1} ... omega_{k'+2**m}`` to have product
    at most ``beta``.  The logs base ``beta`` then lie in ``[-1, 1]`` and sum to at
    most 1, so the interval finder applies; returns ``None`` when ``k'`` does not
    qualify.  Used to seed and cross-check the direct scan.
    """
    m = max(n, 7)
    length = 2**m
    beta = Fraction(beta)
    if beta <= 1:
        return None
    with mpmath.workprec(precision_for(k_prime + length) + 64):
        log_beta = mpmath.log(mpmath.mpf(beta.numerator) / beta.denominator)
        logs = [w.log_product_mp(k_prime + j, k_prime + j) / log_beta for j in range(1, length + 1)]
        total = mpmath.fsum(logs)
        if total > 1:
            return None
        # exact rationals close enough to the logs; the margin absorbs rounding
        deltas = [Fraction(mpmath.nstr(v, 30)) for v in logs]
    excess = sum(deltas) - 1
    if excess > 0:
        deltas[-1] -= excess
    deltas = [min(Fraction(1), max(Fraction(-1), d)) for d in deltas]
    if sum(deltas) > 1:
        return None
    interval = find_good_interval(deltas, m)
    return k_prime + interval.hi - n


@dataclass
class WeightReport:
    """Outcome of the convergence and product conditions on ``w``."""

    p: Fraction
    checkpoints: list
    partial_sums: list
    verdict: str
    surrogate: float
    surrogate_pass: bool
    finite_check_only: bool = True
    tolerance: float = 1e-3
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "converges" and self.surrogate_pass

    def to_json(self) -> dict:
        return {
            "p": str(self.p),
            "checkpoints": [str(c) for c in self.checkpoints],
            "partial_sums": [repr(float(s)) for s in self.partial_sums],
            "verdict": self.verdict,
            "surrogate": repr(self.surrogate),
            "surrogate_pass": self.surrogate_pass,
            "finite_check_only": self.finite_check_only,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "notes": list(self.notes),
        }


def _window_min_log(w: WeightSequence, n: int, kmax: int) -> float:
    """``min_{0 <= k <= kmax} log prod_{j=1}^{n} omega_{k+j}``."""
    if isinstance(w, ParametricWeight):
        return w.log_product(kmax + 1, kmax + n)
    if isinstance(w, DyadicWeight):
        low_e = min(w.exponent(k + n) - w.exponent(k) for k in range(kmax + 1))
        return low_e * w.b * math.log(2)
    if isinstance(w, TabulatedWeight):
        if w.extension is None:
            kmax = min(kmax, w.length - n)
        return min(w.log_product(k + 1, k + n) for k in range(kmax + 1))
    return min(w.log_product(k + 1, k + n) for k in range(kmax + 1))


def check_weight_condition(w: WeightSequence, p, horizon: int = 10**4, nmax: int = 10, kmax: int = 10**5, tolerance: float = 1e-3) -> WeightReport:
    """Series ``sum (omega_1...omega_k)**-p`` and the surrogate ``max_n min_k prod omega_{k+j}``."""
    p = Fraction(p)
    checkpoints = []
    c = 10
    while c < horizon:
        checkpoints.append(c)
        c *= 10
    checkpoints.append(horizon)
    sums = []
    with mpmath.workprec(64):
        p_mp = mpmath.mpf(p.numerator) / p.denominator
        log_p = mpmath.mpf(0)
        acc = mpmath.mpf(0)
        nxt = 0
        last = checkpoints[-1]
        if isinstance(w, TabulatedWeight) and w.extension is None:
            last = min(last, w.length)
            checkpoints = [x for x in checkpoints if x <= last] or [last]
        for ell in range(1, last + 1):
            log_p += w.log_product_mp(ell, ell)
            acc += mpmath.exp(-p_mp * log_p)
            if ell == checkpoints[nxt]:
                sums.append(+acc)
                nxt += 1
                if nxt == len(checkpoints):
                    break
    verdict = w.series_verdict(p)
    notes = []
    if verdict == "unknown":
        notes.append("no analytic verdict for a finite table; partial sums only")
    best = max(_window_min_log(w, n, kmax) for n in range(1, nmax + 1))
    surrogate = math.exp(best)
    return WeightReport(
        p=p,
        checkpoints=checkpoints,
        partial_sums=sums,
        verdict=verdict,
        surrogate=surrogate,
        surrogate_pass=surrogate <= 1 + tolerance,
        tolerance=tolerance,
        notes=notes,
    )
