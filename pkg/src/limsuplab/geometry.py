"""Exact and statistical measure computation for neighbourhood unions.

One-dimensional work (interval and circle ambients) is exact: interval
unions carry sorted disjoint closed intervals with Fraction endpoints, so
Lebesgue measure is a single exact sum.  Two-dimensional work (strip
neighbourhoods of lines in the unit square) is exact for a single strip via
half-plane clipping and statistical for unions, with a seeded, counter-based
Monte Carlo estimator whose result does not depend on how the samples are
partitioned.

Inexact inputs (float radii, irrational arc centres) are rounded to
Fractions conservatively: radii shrink, so any measure used as a lower bound
in the ubiquity checks errs on the safe side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError

#: denominator bound used when an inexact value must become a Fraction
ROUND_DEN = 2**64


def round_down(x, den: int = ROUND_DEN) -> Fraction:
    """Largest multiple of 1/den at or below x (exact passthrough for Fractions)."""
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    n = math.floor(Fraction(float(x)) * den)
    return Fraction(n, den)


def round_nearest(x, den: int = ROUND_DEN) -> Fraction:
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    return Fraction(round(Fraction(float(x)) * den), den)


@dataclass(frozen=True)
class Ball:
    """Metric ball, understood intersected with its ambient space."""

    center: Union[Fraction, Tuple]
    radius: Union[Fraction, float]
    ambient: str = "unit_interval"  # unit_interval | unit_circle | unit_square

    def radius_fraction(self) -> Fraction:
        return round_down(self.radius)

    def interval(self) -> Tuple[Fraction, Fraction]:
        if self.ambient != "unit_interval":
            raise DomainError("interval() only for unit_interval balls")
        c = round_nearest(self.center)
        r = self.radius_fraction()
        return max(Fraction(0), c - r), min(Fraction(1), c + r)

    def measure(self) -> Fraction:
        if self.ambient == "unit_interval":
            lo, hi = self.interval()
            return hi - lo
        if self.ambient == "unit_circle":
            return min(2 * self.radius_fraction(), Fraction(1))
        raise DomainError("use region helpers for planar ball measures")


FULL_INTERVAL = Ball(Fraction(1, 2), Fraction(1, 2), "unit_interval")


# ---------------------------------------------------------------------------
# interval unions (exact)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted, pairwise-disjoint closed intervals with Fraction endpoints.

    Endpoints live in [0,1]; with ``circular=True`` the coordinate is arc
    length on a circumference-1 circle and unions are taken modulo 1.
    """

    intervals: Tuple[Tuple[Fraction, Fraction], ...]
    circular: bool = False

    @staticmethod
    def from_intervals(raw: Iterable[Tuple[Fraction, Fraction]], circular: bool = False) -> "IntervalUnion":
        clipped = []
        for lo, hi in raw:
            lo, hi = Fraction(lo), Fraction(hi)
            lo, hi = max(lo, Fraction(0)), min(hi, Fraction(1))
            if lo <= hi:
                clipped.append((lo, hi))
        clipped.sort()
        merged: List[Tuple[Fraction, Fraction]] = []
        for lo, hi in clipped:
            if merged and lo <= merged[-1][1]:
                if hi > merged[-1][1]:
                    merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        if circular and len(merged) >= 2:
            first, last = merged[0], merged[-1]
            if last[1] == 1 and first[0] == 0:
                merged[0] = (Fraction(0), first[1])  # wraparound touch is a merge mod 1
        return IntervalUnion(tuple(merged), circular)

    @staticmethod
    def from_balls(centers: Sequence[Fraction], radius: Fraction, circular: bool = False) -> "IntervalUnion":
        radius = Fraction(radius)
        if circular:
            raw = []
            for c in centers:
                c = Fraction(c) % 1
                lo, hi = c - radius, c + radius
                if 2 * radius >= 1:
                    return IntervalUnion(((Fraction(0), Fraction(1)),), True)
                if lo < 0:
                    raw += [(Fraction(0), hi), (lo + 1, Fraction(1))]
                elif hi > 1:
                    raw += [(lo, Fraction(1)), (Fraction(0), hi - 1)]
                else:
                    raw.append((lo, hi))
            return IntervalUnion.from_intervals(raw, True)
        return IntervalUnion.from_intervals((Fraction(c) - radius, Fraction(c) + radius) for c in centers)

    @property
    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.intervals), Fraction(0))

    def intersect_interval(self, lo: Fraction, hi: Fraction) -> "IntervalUnion":
        lo, hi = Fraction(lo), Fraction(hi)
        out = []
        for a, b in self.intervals:
            a2, b2 = max(a, lo), min(b, hi)
            if a2 <= b2:
                out.append((a2, b2))
        return IntervalUnion(tuple(out), self.circular)

    def intersect(self, other: "IntervalUnion") -> "IntervalUnion":
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalUnion(tuple(out), self.circular)

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion.from_intervals(list(self.intervals) + list(other.intervals), self.circular)

    def measure_within(self, ball: Optional[Ball]) -> Fraction:
        if ball is None:
            return self.measure
        if self.circular:
            c = round_nearest(ball.center) % 1
            r = ball.radius_fraction()
            if 2 * r >= 1:
                return self.measure
            lo, hi = c - r, c + r
            pieces = [(lo % 1, Fraction(1)), (Fraction(0), hi % 1)] if (lo < 0 or hi > 1) else [(lo, hi)]
            return sum((self.intersect_interval(a, b).measure for a, b in pieces), Fraction(0))
        lo, hi = ball.interval()
        return self.intersect_interval(lo, hi).measure

    def contains_point(self, x: Fraction) -> bool:
        for lo, hi in self.intervals:
            if lo <= x <= hi:
                return True
        return False


# ---------------------------------------------------------------------------
# strip unions in the unit square
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Strip:
    """|p - (q1*x + q2*y)| < halfwidth * ||q||, i.e. Euclidean distance to the
    line q1*x + q2*y = p below ``halfwidth``, clipped to the unit square."""

    p: int
    q1: int
    q2: int
    halfwidth: float

    def norm(self) -> float:
        return math.hypot(self.q1, self.q2)

    def signed_distance(self, x, y):
        return (self.q1 * x + self.q2 * y - self.p) / self.norm()

    def polygon(self) -> List[Tuple[float, float]]:
        """Strip cap unit square as a convex polygon (possibly empty)."""
        lam = self.halfwidth * self.norm()
        square = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
        poly = clip_halfplane(square, self.q1, self.q2, self.p + lam)
        return clip_halfplane(poly, -self.q1, -self.q2, -(self.p - lam))

    def area(self) -> float:
        return polygon_area(self.polygon())


@dataclass(frozen=True)
class StripUnion:
    strips: Tuple[Strip, ...]
    seed: int = 0
    samples: int = 10**6
    estimate: Optional[Tuple[float, float]] = field(default=None, compare=False)

    @property
    def n_strips(self) -> int:
        return len(self.strips)


def clip_halfplane(poly: Sequence[Tuple[float, float]], a: float, b: float, c: float) -> List[Tuple[float, float]]:
    """Sutherland-Hodgman clip of a convex polygon to {a*x + b*y <= c}."""
    if not poly:
        return []
    out: List[Tuple[float, float]] = []
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        in1 = a * x1 + b * y1 <= c
        in2 = a * x2 + b * y2 <= c
        if in1:
            out.append((x1, y1))
        if in1 != in2:
            t = (c - a * x1 - b * y1) / (a * (x2 - x1) + b * (y2 - y1))
            out.append((x1 + t * (x2 - x1), y1 + t * (y2 - y1)))
    return out


def polygon_area(poly: Sequence[Tuple[float, float]]) -> float:
    if len(poly) < 3:
        return 0.0
    s = 0.0
    for i in range(len(poly)):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % len(poly)]
        s += x1 * y2 - x2 * y1
    return abs(s) / 2.0


def exact_strip_union_area(strips: Sequence[Strip]) -> float:
    """Inclusion-exclusion area of up to three strips in the unit square."""
    if len(strips) > 3:
        raise DomainError("exact strip unions are reserved for <= 3 strips")
    polys = [s.polygon() for s in strips]
    total = 0.0
    n = len(polys)
    import itertools

    for k in range(1, n + 1):
        for idx in itertools.combinations(range(n), k):
            inter = polys[idx[0]]
            for j in idx[1:]:
                inter = clip_polygon_convex(inter, polys[j])
            total += (-1) ** (k + 1) * polygon_area(inter)
    return total


def clip_polygon_convex(subject: Sequence[Tuple[float, float]], clip: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
    """Clip one convex polygon by another (vertices counter-clockwise)."""
    poly = ccw(list(subject))
    clip = ccw(list(clip))
    for i in range(len(clip)):
        if not poly:
            return []
        x1, y1 = clip[i]
        x2, y2 = clip[(i + 1) % len(clip)]
        # interior is left of the directed edge: (y2-y1) x - (x2-x1) y <= ...
        a, b = y2 - y1, x1 - x2
        c = a * x1 + b * y1
        poly = clip_halfplane(poly, a, b, c)
    return poly


def ccw(poly: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
    if len(poly) >= 3:
        s = 0.0
        for i in range(len(poly)):
            x1, y1 = poly[i]
            x2, y2 = poly[(i + 1) % len(poly)]
            s += x1 * y2 - x2 * y1
        if s < 0:
            return poly[::-1]
    return poly


# ---------------------------------------------------------------------------
# counter-based Monte Carlo (grid-jittered, partition independent)
# ---------------------------------------------------------------------------

Z99 = 2.5758293035489004  # two-sided 99% normal quantile


_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _mix64(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, vectorized: a counter-based uniform hash."""
    x = (x + np.uint64(0x9E3779B97F4A7C15)) & _MASK64
    x = ((x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK64
    x = ((x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK64
    return x ^ (x >> np.uint64(31))


def _philox_points(seed: int, start: int, count: int, total: int) -> np.ndarray:
    """Jittered stratified samples start..start+count-1 out of ``total``.

    Sample i sits in cell i mod g^2 of a g x g grid (g set by the total
    count) with jitter hashed purely from (seed, i), so any partition of the
    index range reproduces exactly the same points chunk by chunk.
    """
    g = max(1, math.isqrt(total))
    idx = np.arange(start, start + count, dtype=np.uint64)
    key = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    jx = _mix64(idx * np.uint64(2) ^ _mix64(np.full(count, key)))
    jy = _mix64(idx * np.uint64(2) + np.uint64(1) ^ _mix64(np.full(count, key ^ np.uint64(0xA5A5A5A5A5A5A5A5))))
    inv = 1.0 / 2.0**64
    cell = (idx % np.uint64(g * g)).astype(np.int64)
    pts = np.empty((count, 2))
    pts[:, 0] = (cell % g + jx.astype(np.float64) * inv) / g
    pts[:, 1] = (cell // g % g + jy.astype(np.float64) * inv) / g
    return pts


def strip_union_measure(region: StripUnion, within: Optional[Ball] = None) -> Tuple[float, float]:
    """(estimate, 99%-confidence half-width) for the union area, Monte Carlo.

    Deterministic given the seed; single strips take the exact path in
    :func:`region_measure` instead.
    """
    n = region.samples
    pts = _philox_points(region.seed, 0, n, n)
    hit = np.zeros(n, dtype=bool)
    for s in region.strips:
        lam = s.halfwidth * s.norm()
        val = s.q1 * pts[:, 0] + s.q2 * pts[:, 1] - s.p
        hit |= np.abs(val) < lam
    if within is not None:
        cx, cy = float(within.center[0]), float(within.center[1])
        r = float(within.radius)
        inside = (pts[:, 0] - cx) ** 2 + (pts[:, 1] - cy) ** 2 < r * r
        hit &= inside
    phat = float(hit.mean())
    half = Z99 * math.sqrt(max(phat * (1 - phat), 1.0 / n) / n)
    return phat, half


Region = Union[IntervalUnion, StripUnion]


def region_measure(region: Region, within: Optional[Ball] = None) -> Tuple[float, float]:
    """(value, error bound); exact paths report error 0."""
    if isinstance(region, IntervalUnion):
        return float(region.measure_within(within)), 0.0
    if region.n_strips == 0:
        return 0.0, 0.0
    if region.n_strips == 1 and within is None:
        return region.strips[0].area(), 0.0
    return strip_union_measure(region, within)


def region_measure_exact(region: IntervalUnion, within: Optional[Ball] = None) -> Fraction:
    if not isinstance(region, IntervalUnion):
        raise DomainError("exact measure only for interval unions")
    return region.measure_within(within)


# ---------------------------------------------------------------------------
# covering selection: disjoint balls whose 3-dilates cover the input
# ---------------------------------------------------------------------------


def greedy_3r_cover(balls: Sequence[Ball]) -> List[Ball]:
    """Disjoint sub-collection whose 3-dilates cover every input ball.

    All balls must share one radius.  Centres are processed in sorted order;
    a ball is kept iff its centre is farther than 2r from every kept centre,
    which in one dimension and on the circle needs only the nearest kept
    neighbour.
    """
    if not balls:
        return []
    radii = {Fraction(b.radius) if isinstance(b.radius, (int, Fraction)) else float(b.radius) for b in balls}
    if len(radii) != 1:
        raise DomainError("covering selection requires a common radius")
    ambient = balls[0].ambient
    r = balls[0].radius
    if ambient == "unit_square":
        return _greedy_2d(balls, float(r))
    pts = sorted(set(Fraction(b.center) for b in balls))
    two_r = 2 * Fraction(r) if isinstance(r, (int, Fraction)) else None
    kept: List[Fraction] = []
    for c in pts:
        if not kept:
            kept.append(c)
            continue
        gap = c - kept[-1]
        if (two_r is not None and gap > two_r) or (two_r is None and float(gap) > 2 * float(r)):
            kept.append(c)
    if ambient == "unit_circle" and len(kept) >= 2:
        # wraparound: drop the last pick if it crowds the first modulo 1
        gap = (kept[0] + 1) - kept[-1]
        limit = two_r if two_r is not None else Fraction(float(2 * float(r)))
        if gap <= limit and len(kept) > 1:
            kept.pop()
    return [Ball(c, r, ambient) for c in kept]


def _greedy_2d(balls: Sequence[Ball], r: float) -> List[Ball]:
    cell = 2.0 * r if r > 0 else 1.0
    grid = {}
    kept = []
    for b in sorted(balls, key=lambda b: (float(b.center[0]), float(b.center[1]))):
        x, y = float(b.center[0]), float(b.center[1])
        gx, gy = int(x / cell), int(y / cell)
        ok = True
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for (px, py) in grid.get((gx + dx, gy + dy), ()):
                    if (px - x) ** 2 + (py - y) ** 2 <= (2 * r) ** 2:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            grid.setdefault((gx, gy), []).append((x, y))
            kept.append(b)
    return kept


# ---------------------------------------------------------------------------
# mass distribution lower bound
# ---------------------------------------------------------------------------


def mdp_lower_bound(mass_samples: Sequence[Tuple[Ball, float]], f, total_mass_on_x: float) -> float:
    """Certified lower bound total/c for the generalized measure of the support,
    where c is the worst observed mass-to-gauge ratio mu(B)/f(r(B))."""
    if not mass_samples:
        raise DomainError("need at least one (ball, mass) sample")
    c = 0.0
    for ball, mass in mass_samples:
        r = float(ball.radius)
        if r <= 0:
            raise DomainError("zero-radius ball in mass samples")
        c = max(c, float(mass) / f.eval_small(r))
    if c == 0.0:
        raise DomainError("all masses are zero")
    return float(total_mass_on_x) / c


# ---------------------------------------------------------------------------
# disc cap strip cap unit square, exact area
# ---------------------------------------------------------------------------


def circle_polygon_area(cx: float, cy: float, R: float, poly: Sequence[Tuple[float, float]]) -> float:
    """Area of disc(center, R) cap convex polygon, by Green's theorem.

    Each polygon edge contributes the area of the circular triangle/sector
    between it and the centre, with segments replaced by arcs where the edge
    leaves the disc.
    """
    if R <= 0 or len(poly) < 3:
        return 0.0
    pts = [(x - cx, y - cy) for x, y in ccw(list(poly))]
    total = 0.0
    n = len(pts)
    for i in range(n):
        total += _edge_contribution(pts[i], pts[(i + 1) % n], R)
    return abs(total)


def _edge_contribution(p1, p2, R):
    x1, y1 = p1
    x2, y2 = p2
    d1 = math.hypot(x1, y1) <= R + 1e-15
    d2 = math.hypot(x2, y2) <= R + 1e-15
    cross = x1 * y2 - x2 * y1

    def sector(a, b):
        th1 = math.atan2(a[1], a[0])
        th2 = math.atan2(b[1], b[0])
        dth = th2 - th1
        while dth <= -math.pi:
            dth += 2 * math.pi
        while dth > math.pi:
            dth -= 2 * math.pi
        return 0.5 * R * R * dth

    if d1 and d2:
        return 0.5 * cross
    hits = _segment_circle_hits(p1, p2, R)
    if d1 and not d2:
        q = hits[0]
        return 0.5 * (x1 * q[1] - q[0] * y1) + sector(q, p2)
    if d2 and not d1:
        q = hits[-1]
        return sector(p1, q) + 0.5 * (q[0] * y2 - x2 * q[1])
    if len(hits) == 2:
        qa, qb = hits
        return sector(p1, qa) + 0.5 * (qa[0] * qb[1] - qb[0] * qa[1]) + sector(qb, p2)
    return sector(p1, p2)


def _segment_circle_hits(p1, p2, R):
    x1, y1 = p1
    x2, y2 = p2
    dx, dy = x2 - x1, y2 - y1
    a = dx * dx + dy * dy
    if a == 0:
        return []
    b = 2 * (x1 * dx + y1 * dy)
    c = x1 * x1 + y1 * y1 - R * R
    disc = b * b - 4 * a * c
    if disc <= 0:
        return []
    s = math.sqrt(disc)
    out = []
    for t in ((-b - s) / (2 * a), (-b + s) / (2 * a)):
        if 0.0 <= t <= 1.0:
            out.append((x1 + t * dx, y1 + t * dy))
    return out


def disc_strip_square_area(line: Tuple[int, int, int], center: Tuple[float, float], R: float, lam: float) -> float:
    """Exact area of disc(center,R) cap {dist to line < lam} cap unit square.

    The centre must lie on the line (residual below 1e-12); raises otherwise.
    """
    p, q1, q2 = line[0], line[1], line[2]
    strip = Strip(p, q1, q2, lam)
    cx, cy = float(center[0]), float(center[1])
    if abs(strip.signed_distance(cx, cy)) > 1e-12:
        raise DomainError("centre is not on the resonant line")
    if R <= 0 or lam <= 0:
        return 0.0
    return circle_polygon_area(cx, cy, R, strip.polygon())


def disc_square_area(center: Tuple[float, float], R: float) -> float:
    square = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    return circle_polygon_area(float(center[0]), float(center[1]), R, square)
