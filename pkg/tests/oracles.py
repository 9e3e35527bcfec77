"""Independent oracles used by the tests.

Everything here recomputes expected values by routes deliberately different
from the library's own: quadratic-time interval merging, numeric partial
sums that only sample term values, arbitrary-precision evaluation, and
brute-force scans.  Keeping these separate from the package is the point.
"""

from __future__ import annotations

import math
from fractions import Fraction
from math import isqrt


# -- quadratic-time interval union measure -----------------------------------


def naive_union_measure(intervals):
    """Measure of a union of closed intervals by pairwise subtraction."""
    total = Fraction(0)
    seen = []
    for lo, hi in intervals:
        lo, hi = max(Fraction(lo), Fraction(0)), min(Fraction(hi), Fraction(1))
        if hi < lo:
            continue
        pieces = [(lo, hi)]
        for slo, shi in seen:
            nxt = []
            for plo, phi in pieces:
                if shi <= plo or phi <= slo:
                    nxt.append((plo, phi))
                    continue
                if plo < slo:
                    nxt.append((plo, slo))
                if shi < phi:
                    nxt.append((shi, phi))
            pieces = nxt
        total += sum((b - a for a, b in pieces), Fraction(0))
        seen.append((lo, hi))
    return total


# -- numeric partial-sum / integral-test series oracle ------------------------


def _block_sum(fn, a: float, b: float, nodes: int = 96) -> float:
    """Approximate sum_{r=a..b} fn(r) by the integral in t = ln r plus an
    endpoint correction (fn is monotone on the blocks we use)."""
    ta, tb = math.log(a), math.log(b)
    h = (tb - ta) / nodes
    s = 0.0
    for i in range(nodes + 1):
        t = ta + i * h
        w = 1.0 if i in (0, nodes) else (4.0 if i % 2 else 2.0)
        s += w * fn(math.exp(t)) * math.exp(t)
    return s * h / 3.0 + fn(a)


def partial_sum_series_class(fn, start: float = 64.0) -> str:
    """'converges' / 'diverges' / 'unknown' from sampled values of fn only.

    Decade-block partial sums out to 1e32: log factors can keep increments
    growing for a dozen decades before the power law takes over, so the
    decision reads the last few increment ratios only.  Reliable when the
    power exponent sits at least 0.1 away from the critical value and log
    exponents are moderate; anything subtler lands in 'unknown'.
    """
    decades = [10.0**k for k in range(3, 33)]
    inc = [_block_sum(fn, start, decades[0])]
    for a, b in zip(decades, decades[1:]):
        inc.append(_block_sum(fn, a, b))
    if any(i <= 0 for i in inc):
        return "converges"
    ratios = [b / a for a, b in zip(inc, inc[1:])]
    tail = ratios[-3:]
    if all(r <= 0.90 for r in tail):
        return "converges"
    if all(r >= 0.97 for r in tail):
        return "diverges"
    return "unknown"


# -- arbitrary-precision evaluation -------------------------------------------


def mp_eval_log_power(coeff, p, q, w, r, dps: int = 60) -> float:
    import mpmath as mp

    with mp.workdps(dps):
        rr = mp.mpf(float(r)) if not isinstance(r, (int, Fraction)) else mp.mpf(r.numerator) / mp.mpf(
            r.denominator) if isinstance(r, Fraction) else mp.mpf(r)
        val = (mp.mpf(coeff.numerator) / mp.mpf(coeff.denominator)
               * rr ** (mp.mpf(p.numerator) / mp.mpf(p.denominator)))
        if q != 0:
            val *= mp.log(rr) ** (mp.mpf(q.numerator) / mp.mpf(q.denominator))
        if w != 0:
            val *= mp.log(mp.log(rr)) ** (mp.mpf(w.numerator) / mp.mpf(w.denominator))
        return float(val)


# -- brute-force circle scan ---------------------------------------------------


def circle_lattice_points(q: int):
    """All (p1, p2) with p1^2 + p2^2 = q^2, scanned over the full square."""
    out = []
    for p1 in range(-q, q + 1):
        rest = q * q - p1 * p1
        if rest < 0:
            continue
        p2 = isqrt(rest)
        if p2 * p2 == rest:
            out.append((p1, p2))
            if p2 != 0:
                out.append((p1, -p2))
    return sorted(set(out))


# -- direct numeric composition -----------------------------------------------


def composed_series_class(f_small, psi_large) -> str:
    """Series class of r * f(psi(r)) for the basic point system, sampled."""
    return partial_sum_series_class(lambda r: r * f_small(psi_large(r)))
