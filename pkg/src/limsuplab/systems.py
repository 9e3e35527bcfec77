"""Concrete enumerable resonant systems and their window enumerations.

A resonant system is a countable family of distinguished subsets of an
ambient space (rational points of the interval, rational points on the unit
circle, real algebraic numbers of bounded degree, rational lines in the unit
square), each carrying an integer weight.  Everything downstream consumes
them through weight windows (l_n, u_n] along a geometric sequence u_n = k^n:
``enumerate_window`` lists the members whose weight falls in the window and
whose set meets an optional ball, exactly and without duplicates.

Each system also records the data the verdict engine needs: ambient
dimension, common dimension of the resonant sets, the locating function
rho whose neighbourhoods capture a fixed share of every ball, window
cardinality exponents, and ambient measure constants.
"""

from __future__ import annotations

import math
import os
import pickle
import hashlib
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from .errors import DomainError, ResourceCapError
from .funcs import ExtendedLogPower, GeometricSequence
from .geometry import Ball, round_nearest

DEFAULT_WINDOW_CAP = 50_000_000
CACHE_VERSION = 1

RATIONALS = "rationals"
PRIME_RATIONALS = "prime_rationals"
ALGEBRAIC = "algebraic"
CIRCLE = "circle"
LINES21 = "lines21"

UBIQUITY_CLAIMED = "claimed"
UBIQUITY_VERIFIED = "verified"
UBIQUITY_NONE = "none"


@dataclass(frozen=True)
class ResonantElement:
    provenance: Tuple[int, ...]
    weight: int
    geometry: object  # Fraction point, (p1, p2, q) circle triple, or (p, q1, q2) line

    def csv_row(self) -> str:
        geo = self.geometry
        if isinstance(geo, Fraction):
            gtxt = f"{geo.numerator}/{geo.denominator}"
        else:
            gtxt = ":".join(str(v) for v in geo)
        return ",".join([":".join(str(v) for v in self.provenance), str(self.weight), gtxt])


@dataclass(frozen=True)
class ResonantSystem:
    name: str
    ambient: str
    delta: Fraction
    gamma: Fraction
    rho: ExtendedLogPower
    k: Fraction
    card_exponents: Tuple[Fraction, Fraction]
    card_coeff: float
    measure_constants: Tuple[Fraction, Fraction]
    ubiquity: str = UBIQUITY_CLAIMED
    degree: int = 0  # algebraic only
    reduced: bool = False  # rationals: enumerate reduced fractions only
    window_cap: int = DEFAULT_WINDOW_CAP

    def seq(self, n_max: int = 64) -> GeometricSequence:
        return GeometricSequence(self.k, n_max)

    def u(self, n: int) -> Fraction:
        return Fraction(self.k) ** n

    def window(self, n: int) -> Tuple[int, int]:
        """Integer weights in (k^(n-1), k^n]."""
        lo = math.floor(self.u(n - 1))
        hi = math.floor(self.u(n))
        return lo + 1, hi

    def descriptor(self) -> str:
        bits = [self.name, f"k={self.k}", f"rho={self.rho}"]
        if self.name == ALGEBRAIC:
            bits.append(f"d={self.degree}")
        if self.reduced:
            bits.append("reduced")
        return ";".join(bits)

    def with_ubiquity(self, flag: str) -> "ResonantSystem":
        return replace(self, ubiquity=flag)


def rationals(k: Fraction | int = 6, rho_coeff=None, reduced: bool = False, **kw) -> ResonantSystem:
    """Rational points p/q of [0,1]; weight q; locating function ~ k * r^-2.

    k >= 6 is the smallest base for which the locating neighbourhoods
    provably capture half of every interval.
    """
    k = Fraction(k)
    coeff = Fraction(rho_coeff) if rho_coeff is not None else k
    return ResonantSystem(
        RATIONALS, "unit_interval", Fraction(1), Fraction(0),
        ExtendedLogPower(coeff, -2), k, (Fraction(2), Fraction(0)),
        float((1 - 1 / k**2) / 2), (Fraction(1), Fraction(2)), reduced=reduced, **kw,
    )


def prime_rationals(k: Fraction | int = 2, rho_coeff=1, **kw) -> ResonantSystem:
    """p/q with both p and q prime; the density of primes puts a squared
    logarithm into the locating function."""
    k = Fraction(k)
    return ResonantSystem(
        PRIME_RATIONALS, "unit_interval", Fraction(1), Fraction(0),
        ExtendedLogPower(Fraction(rho_coeff), -2, 2), k, (Fraction(2), Fraction(-2)),
        float((1 - 1 / k**2) / 2), (Fraction(1), Fraction(2)), **kw,
    )


def algebraic(degree: int, k: Fraction | int = 10, rho_coeff=1, **kw) -> ResonantSystem:
    """Real algebraic numbers in [0,1] of degree <= d, weighted by the height
    of the minimal polynomial; enumeration is exhaustive, so d <= 3."""
    if not 1 <= degree <= 3:
        raise DomainError("enumeration is exhaustive only for degree <= 3")
    k = Fraction(k)
    return ResonantSystem(
        ALGEBRAIC, "unit_interval", Fraction(1), Fraction(0),
        ExtendedLogPower(Fraction(rho_coeff), -(degree + 1)), k,
        (Fraction(degree + 1), Fraction(0)), 0.25, (Fraction(1), Fraction(2)),
        degree=degree, **kw,
    )


def circle(k: Fraction | int = 2, rho_coeff=1, **kw) -> ResonantSystem:
    """Rational points on the unit circle (scaled Pythagorean triples plus the
    four axis points), weight = denominator; arc-length coordinates are
    normalized to circumference 1."""
    k = Fraction(k)
    return ResonantSystem(
        CIRCLE, "unit_circle", Fraction(1), Fraction(0),
        ExtendedLogPower(Fraction(rho_coeff), -1), k, (Fraction(1), Fraction(0)),
        2.0, (Fraction(1), Fraction(2)), **kw,
    )


def lines21(k: Fraction | int = 2, rho_coeff=1, omega_log_exp: Fraction | int = 1, **kw) -> ResonantSystem:
    """Rational lines q1*x + q2*y = p in the unit square, weight max(|q1|,|q2|).

    The locating function carries a slowly growing factor, fixed here to
    (ln r)^omega_log_exp; the critical exponent is insensitive to it.
    """
    k = Fraction(k)
    return ResonantSystem(
        LINES21, "unit_square", Fraction(2), Fraction(1),
        ExtendedLogPower(Fraction(rho_coeff), -3, Fraction(omega_log_exp)), k,
        (Fraction(3), Fraction(0)), 1.9, (Fraction(78, 100), Fraction(315, 100)), **kw,
    )


_FACTORIES = {
    RATIONALS: rationals,
    PRIME_RATIONALS: prime_rationals,
    ALGEBRAIC: algebraic,
    CIRCLE: circle,
    LINES21: lines21,
}


def make_system(name: str, **kw) -> ResonantSystem:
    name = name.strip().lower().replace("-", "_")
    if name.startswith("algebraic"):
        tail = name.removeprefix("algebraic").strip("()_ ")
        if tail:
            kw.setdefault("degree", int(tail))
        name = ALGEBRAIC
    if name not in _FACTORIES:
        raise DomainError(f"unknown system {name!r}")
    return _FACTORIES[name](**kw)


# ---------------------------------------------------------------------------
# per-system enumeration
# ---------------------------------------------------------------------------


def predicted_window_size(sys: ResonantSystem, n: int, restrict_measure: float = 1.0) -> float:
    u = float(sys.u(n))
    p, q = float(sys.card_exponents[0]), float(sys.card_exponents[1])
    full = sys.card_coeff * u**p * math.log(max(u, 3.0)) ** q
    # weight-indexed systems walk every weight in the window even when the
    # restriction keeps almost nothing, so the loop length is part of the cost
    loop = u * (1.0 - 1.0 / float(sys.k))
    return full * max(min(restrict_measure, 1.0), 1e-12) + 8 * math.sqrt(full) + loop


def _check_cap(sys: ResonantSystem, n: int, restrict_measure: float = 1.0):
    pred = predicted_window_size(sys, n, restrict_measure)
    if pred > sys.window_cap:
        raise ResourceCapError(
            f"window n={n} of {sys.name} predicts ~{pred:.3g} elements over cap {sys.window_cap}",
            predicted=pred, cap=sys.window_cap,
        )


def _iter_weight_range(sys: ResonantSystem, lo: int, hi: int, restrict_to):
    if sys.name == RATIONALS:
        return _iter_rationals(sys, lo, hi, restrict_to)
    if sys.name == PRIME_RATIONALS:
        return _iter_prime_rationals(lo, hi, restrict_to)
    if sys.name == ALGEBRAIC:
        return _iter_algebraic(sys.degree, lo, hi, restrict_to)
    if sys.name == CIRCLE:
        return _iter_circle(lo, hi, restrict_to)
    if sys.name == LINES21:
        return _iter_lines21(lo, hi, restrict_to)
    raise DomainError(sys.name)  # pragma: no cover


def enumerate_weight_range(sys: ResonantSystem, lo: int, hi: int, restrict_to: Optional[Ball] = None) -> List[ResonantElement]:
    """Duplicate-free listing of elements with weight in [lo, hi]."""
    restrict_measure = 1.0
    if restrict_to is not None and sys.ambient != "unit_square":
        restrict_measure = float(2 * Fraction(restrict_to.radius))
    n_cap = max(1, math.ceil(math.log(max(hi, 2)) / math.log(float(sys.k))))
    _check_cap(sys, n_cap, restrict_measure)
    return list(_iter_weight_range(sys, lo, hi, restrict_to))


def enumerate_window(sys: ResonantSystem, n: int, restrict_to: Optional[Ball] = None) -> List[ResonantElement]:
    """Complete duplicate-free window listing, optionally clipped to a ball.

    Duplicates are per provenance: in the default all-pairs mode for the
    rational systems, equal point values with different (p, q) all appear.
    """
    restrict_measure = 1.0
    if restrict_to is not None and sys.ambient != "unit_square":
        restrict_measure = float(2 * Fraction(restrict_to.radius))
    _check_cap(sys, n, restrict_measure)
    cached = _cache_get(sys, n) if restrict_to is None else None
    if cached is not None:
        return cached
    lo, hi = sys.window(n)
    out = list(_iter_weight_range(sys, lo, hi, restrict_to))
    if restrict_to is None:
        _cache_put(sys, n, out)
    return out


def count_in_ball(sys: ResonantSystem, n: int, ball: Optional[Ball]) -> int:
    """Streaming cardinality of the clipped window (no materialized list)."""
    restrict_measure = 1.0
    if ball is not None and sys.ambient != "unit_square":
        restrict_measure = float(2 * Fraction(ball.radius))
    _check_cap(sys, n, restrict_measure)
    lo, hi = sys.window(n)
    return sum(1 for _ in _iter_weight_range(sys, lo, hi, ball))


def natural_cover_term(sys: ResonantSystem) -> ExtendedLogPower:
    """Window cardinality as a log-power term of the upper weight."""
    p, q = sys.card_exponents
    return ExtendedLogPower(Fraction(str(sys.card_coeff)), p, q)


def natural_cover_count(sys: ResonantSystem, n: int, scale: float, exact: bool = False) -> float:
    """Cover-cost multiplier (#window) * scale^-gamma at level n."""
    if scale <= 0:
        raise DomainError("scale must be positive")
    if exact:
        cnt = float(count_in_ball(sys, n, None))
    else:
        cnt = natural_cover_term(sys).eval(float(sys.u(n)))
    return cnt * scale ** (-float(sys.gamma))


# -- rationals ---------------------------------------------------------------


def _p_range(q: int, restrict_to: Optional[Ball]) -> Tuple[int, int]:
    if restrict_to is None:
        return 0, q
    lo, hi = restrict_to.interval()
    return max(0, math.ceil(lo * q)), min(q, math.floor(hi * q))


def _iter_rationals(sys, lo, hi, restrict_to) -> Iterator[ResonantElement]:
    for q in range(lo, hi + 1):
        p0, p1 = _p_range(q, restrict_to)
        for p in range(p0, p1 + 1):
            if sys.reduced and gcd(p, q) != 1:
                continue
            yield ResonantElement((p, q), q, Fraction(p, q))


def window_values_are_full_farey(sys: ResonantSystem, n: int) -> bool:
    """True when the window's point-value set equals all reduced fractions of
    denominator <= floor(u_n).

    Holds whenever every reduced denominator has a multiple in the window,
    which k >= 2 guarantees: consecutive multiples of q0 are q0 apart and the
    window is at least half of u_n long.
    """
    if sys.name != RATIONALS or sys.reduced:
        return False  # reduced windows only carry denominators inside the window
    lo, hi = sys.window(n)
    # q0 <= hi - lo + 1 always has a multiple; larger q0 must itself lie in
    # [lo, hi], which fails only when (hi - lo + 1, lo) is nonempty
    return hi + 2 >= 2 * lo


def weight_multiple_in_window(q0: int, lo: int, hi: int) -> Optional[int]:
    """Smallest multiple of q0 in [lo, hi], or None."""
    m = -(-lo // q0) * q0
    return m if m <= hi else None


# -- prime rationals ---------------------------------------------------------


def primes_up_to(n: int) -> List[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i, b in enumerate(sieve) if b]


def _iter_prime_rationals(lo, hi, restrict_to) -> Iterator[ResonantElement]:
    ps = primes_up_to(hi)
    qs = [q for q in ps if q >= lo]
    for q in qs:
        p0, p1 = _p_range(q, restrict_to)
        for p in ps:
            if p > q:
                break
            if p0 <= p <= p1:
                yield ResonantElement((p, q), q, Fraction(p, q))


# -- algebraic numbers of degree <= 3 ---------------------------------------


def _poly_eval(coeffs: Sequence[int], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in coeffs:  # highest degree first
        acc = acc * x + c
    return acc


def _has_rational_root(coeffs: Sequence[int]) -> bool:
    lead, const = coeffs[0], coeffs[-1]
    if const == 0:
        return True
    for s in _divisors(abs(lead)):
        for p in _divisors(abs(const)):
            for sign in (1, -1):
                if _poly_eval(coeffs, Fraction(sign * p, s)) == 0:
                    return True
    return False


def _divisors(n: int) -> List[int]:
    out = []
    for d in range(1, isqrt(n) + 1):
        if n % d == 0:
            out.append(d)
            if d * d != n:
                out.append(n // d)
    return out


def _content(coeffs) -> int:
    g = 0
    for c in coeffs:
        g = gcd(g, abs(c))
    return g


def _sign_at(coeffs: Sequence[int], x: Fraction) -> int:
    """Exact sign of the integer polynomial at a rational point, via the
    homogeneous form sum c_i num^(d-i) den^i."""
    num, den = x.numerator, x.denominator
    d = len(coeffs) - 1
    acc = 0
    for i, c in enumerate(coeffs):  # highest degree first
        acc += c * num ** (d - i) * den**i
    return (acc > 0) - (acc < 0)


def _bisect_root(coeffs, a: Fraction, b: Fraction, sa: int, depth: int = 48) -> Fraction:
    for _ in range(depth):
        mid = (a + b) / 2
        sm = _sign_at(coeffs, mid)
        if sm == 0:
            return mid
        if sm == sa:
            a = mid
        else:
            b = mid
    return (a + b) / 2


def _real_roots_01(coeffs: Sequence[int]) -> List[Fraction]:
    """Simple real roots in [0,1], bisected to width below 1e-14.

    The input is irreducible hence squarefree: every root is simple and has
    a sign-change bracket.  [0,1] is partitioned at the (bracketed) critical
    points so the polynomial is monotone on each piece, which makes the
    sign-change scan exhaustive; all sign evaluations are exact integer
    arithmetic.
    """
    deg = len(coeffs) - 1
    if deg == 1:
        a1, a0 = coeffs
        root = Fraction(-a0, a1)
        return [root] if 0 <= root <= 1 else []
    cuts = [Fraction(0), Fraction(1)]
    if deg == 2:
        a, b, _ = coeffs
        v = Fraction(-b, 2 * a)
        if 0 < v < 1:
            cuts.append(v)
    else:  # cubic: bracket the roots of the quadratic derivative exactly
        a, b, c, _ = coeffs
        dcoef = (3 * a, 2 * b, c)
        disc = 4 * b * b - 12 * a * c
        if disc > 0:
            vertex = Fraction(-b, 3 * a)
            for lo, hi in ((Fraction(0), vertex), (vertex, Fraction(1))):
                lo2, hi2 = max(lo, Fraction(0)), min(hi, Fraction(1))
                if lo2 >= hi2:
                    continue
                slo = _sign_at(dcoef, lo2)
                if slo == 0 or slo * _sign_at(dcoef, hi2) < 0:
                    r = _bisect_root(dcoef, lo2, hi2, slo if slo else 1, depth=60)
                    cuts.append(r)
    cuts = sorted(set(cuts))
    roots = []
    signs = [_sign_at(coeffs, x) for x in cuts]
    for i in range(len(cuts) - 1):
        sa, sb = signs[i], signs[i + 1]
        if sa == 0:
            roots.append(cuts[i])
        if sa * sb < 0:
            roots.append(_bisect_root(coeffs, cuts[i], cuts[i + 1], sa))
    if signs[-1] == 0:
        roots.append(cuts[-1])
    return sorted(set(roots))


def _iter_algebraic(degree, lo, hi, restrict_to) -> Iterator[ResonantElement]:
    if restrict_to is None:
        rlo, rhi = Fraction(0), Fraction(1)
    else:
        rlo, rhi = restrict_to.interval()
    for H in range(lo, hi + 1):
        for deg in range(1, degree + 1):
            for coeffs in _vectors_with_height(deg, H):
                if _content(coeffs) != 1:
                    continue
                if deg >= 2 and _has_rational_root(coeffs):
                    continue
                for root in _real_roots_01(coeffs):
                    if rlo <= root <= rhi:
                        yield ResonantElement(tuple(coeffs), H, root)


def _vectors_with_height(deg: int, H: int) -> Iterator[Tuple[int, ...]]:
    """Integer vectors (a_deg..a_0), a_deg > 0, max |a_i| = H."""
    span = range(-H, H + 1)

    def rec(i, acc, has_H):
        if i == deg + 1:
            if has_H:
                yield tuple(acc)
            return
        choices = range(1, H + 1) if i == 0 else span
        for c in choices:
            yield from rec(i + 1, acc + [c], has_H or abs(c) == H)

    yield from rec(0, [], False)


# -- rational points on the circle -------------------------------------------


def circle_points_on(q: int) -> List[Tuple[int, int]]:
    """All integer (p1, p2) with p1^2 + p2^2 = q^2, by scanning p1 in [0, q]
    and reflecting (exact integer arithmetic)."""
    pts = set()
    for p1 in range(0, q + 1):
        rem = q * q - p1 * p1
        p2 = isqrt(rem)
        if p2 * p2 == rem:
            for s1 in (p1, -p1):
                for s2 in (p2, -p2):
                    pts.add((s1, s2))
    return sorted(pts)


def circle_angle(p1: int, p2: int, q: int) -> float:
    """Arc-length coordinate in [0,1) on the circumference-1 circle."""
    a = math.atan2(p2, p1) / (2 * math.pi)
    return a % 1.0


def _iter_circle(lo, hi, restrict_to) -> Iterator[ResonantElement]:
    if restrict_to is not None:
        c = float(restrict_to.center) % 1.0
        r = float(restrict_to.radius)
    for q in range(lo, hi + 1):
        for (p1, p2) in circle_points_on(q):
            if restrict_to is not None:
                d = abs(circle_angle(p1, p2, q) - c)
                if min(d, 1.0 - d) > r + 1e-15:
                    continue
            yield ResonantElement((p1, p2, q), q, (p1, p2, q))


def circle_points_in_weight_range(wlo: int, whi: int, quadrant1_only: bool = False) -> List[ResonantElement]:
    out = []
    for q in range(wlo, whi + 1):
        for (p1, p2) in circle_points_on(q):
            if quadrant1_only and (p1 < 0 or p2 < 0):
                continue
            out.append(ResonantElement((p1, p2, q), q, (p1, p2, q)))
    return out


# -- rational lines in the unit square ---------------------------------------


def _iter_lines21(lo, hi, restrict_to) -> Iterator[ResonantElement]:
    for m in range(lo, hi + 1):
        for q1, q2 in _sup_norm_ring(m):
            if not (q1 > 0 or (q1 == 0 and q2 > 0)):
                continue  # one representative per +-(p, q)
            smin = min(0, q1) + min(0, q2)
            smax = max(0, q1) + max(0, q2)
            for p in range(max(-m, smin), min(m, smax) + 1):
                el = ResonantElement((p, q1, q2), m, (p, q1, q2))
                if restrict_to is not None and not _line_meets_ball(el, restrict_to):
                    continue
                yield el


def _sup_norm_ring(m: int) -> Iterator[Tuple[int, int]]:
    for t in range(-m, m + 1):
        yield m, t
        yield -m, t
        if abs(t) != m:
            yield t, m
            yield t, -m


def _line_meets_ball(el: ResonantElement, ball: Ball) -> bool:
    p, q1, q2 = el.geometry
    cx, cy = float(ball.center[0]), float(ball.center[1])
    dist = abs(q1 * cx + q2 * cy - p) / math.hypot(q1, q2)
    return dist <= float(ball.radius) + 1e-15


# ---------------------------------------------------------------------------
# enumeration cache (unrestricted windows only)
# ---------------------------------------------------------------------------


def _cache_path(sys: ResonantSystem, n: int) -> Optional[str]:
    root = os.environ.get("LIMSUP_CACHE_DIR")
    if not root:
        return None
    key = f"v{CACHE_VERSION}|{sys.descriptor()}|n={n}"
    h = hashlib.sha1(key.encode()).hexdigest()[:24]
    return os.path.join(root, f"win_{h}.pkl")


def _cache_get(sys, n):
    path = _cache_path(sys, n)
    if path and os.path.exists(path):
        with open(path, "rb") as fh:
            return pickle.load(fh)
    return None


def _cache_put(sys, n, items):
    path = _cache_path(sys, n)
    if not path:
        return
    os.makedirs(os.path.dirname(path), exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        pickle.dump(items, fh)
    os.replace(tmp, path)
