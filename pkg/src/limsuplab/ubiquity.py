"""Empirical verification of the locating hypotheses behind the verdicts.

Three families of checks:

* local capture ratios m(B cap Delta(rho, n)) / m(B): does the union of
  rho(u_n)-neighbourhoods of a window grab a fixed share of every ball;
* the two ball/thickening intersection inequalities for line systems;
* construction of the separated-ball skeletons A_n inside a window and the
  pairwise-intersection bookkeeping behind the divergence lower bound
  m(limsup) >= (sum of measures)^2 / (sum of pairwise intersections).

Exact rational arithmetic is used on 1-D ambients throughout, with one exact
shortcut for the rational-point system: for k >= 2 the window's point values
are all reduced fractions of denominator <= Q, so the complement of the union
is carried exactly by the neighbour gaps of F_Q, indexed by denominator pairs
(b, d) with b + d > Q.  Only gaps longer than twice the radius contribute,
and those have b*d below a small bound, so the aggregation is cheap at any
window size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, LimsupBranchError, ResourceCapError
from .farey import farey_geq, farey_gt, gap_pairs_below, neighbour_pair
from .funcs import ExtendedLogPower
from .geometry import Ball, IntervalUnion, disc_square_area, disc_strip_square_area, region_measure
from .regions import build_delta, radius_at
from .systems import (
    RATIONALS,
    LINES21,
    ResonantSystem,
    enumerate_window,
    window_values_are_full_farey,
)

AMBIENT_INTERVAL = Ball(Fraction(1, 2), Fraction(1, 2), "unit_interval")


def rationals_union_measure_exact(Q: int, radius: Fraction, lo: Fraction, hi: Fraction) -> Fraction:
    """Exact measure of union over F_Q of B(x, radius) within [lo, hi].

    Complement aggregation over neighbour gaps: the gap between neighbours
    a/b < c/d has length 1/(bd) and is covered up to radius from each end, so
    it contributes max(0, 1/(bd) - 2 radius), clipped to [lo, hi].
    """
    lo, hi = max(lo, Fraction(0)), min(hi, Fraction(1))
    if hi <= lo:
        return Fraction(0)
    if radius <= 0:
        return Fraction(0)
    uncovered = Fraction(0)
    for b, d in gap_pairs_below(Q, Fraction(1, 2 * radius)):
        a, c = neighbour_pair(b, d, Q)
        s = max(Fraction(a, b) + radius, lo)
        e = min(Fraction(c, d) - radius, hi)
        if e > s:
            uncovered += e - s
    return (hi - lo) - uncovered


@dataclass(frozen=True)
class UbiquityCase:
    ball: Ball
    n: int
    ratio: Fraction
    exact: bool
    small_ball_warning: bool  # 36 rho(u_n) >= r(B): outside the separated-ball regime


@dataclass(frozen=True)
class UbiquityReport:
    system: str
    cases: Tuple[UbiquityCase, ...]
    kappa_min: Fraction
    kappa_claim: Optional[Fraction] = None

    @property
    def passed(self) -> Optional[bool]:
        if self.kappa_claim is None:
            return None
        return self.kappa_min >= self.kappa_claim

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "kappa_min": float(self.kappa_min),
            "kappa_claim": None if self.kappa_claim is None else float(self.kappa_claim),
            "passed": self.passed,
            "cases": [
                {
                    "center": float(c.ball.center) if not isinstance(c.ball.center, tuple) else list(map(float, c.ball.center)),
                    "radius": float(c.ball.radius),
                    "n": c.n,
                    "ratio": float(c.ratio),
                    "exact": c.exact,
                    "small_ball_warning": c.small_ball_warning,
                }
                for c in self.cases
            ],
        }


def verify_local_ubiquity(
    sys: ResonantSystem,
    balls: Sequence[Ball],
    n_range: Sequence[int],
    kappa_claim: Optional[Fraction] = None,
    seed: int = 0,
    unrestricted: bool = False,
) -> UbiquityReport:
    """Measure the capture ratio of the locating neighbourhoods on each ball.

    Ratios are exact on 1-D ambients.  Balls smaller than 36 rho(u_n) are
    still measured but flagged: the separated-ball machinery downstream wants
    the neighbourhood scale well inside the ball.  ``unrestricted`` opens
    every weight window at 1 (the form in which capture is usually proved;
    the windowed form is a subset, so windowed ratios are the conservative
    ones).
    """
    cases = []
    for n in n_range:
        rho_u = radius_at(sys.rho, sys, n)
        for ball in balls:
            warn = 36 * rho_u >= Fraction(ball.radius)
            ratio = _capture_ratio(sys, n, ball, seed, unrestricted)
            cases.append(UbiquityCase(ball, n, ratio[0], ratio[1], warn))
    kappa_min = min((c.ratio for c in cases), default=Fraction(0))
    return UbiquityReport(sys.name, tuple(cases), kappa_min, kappa_claim)


def _capture_ratio(sys: ResonantSystem, n: int, ball: Ball, seed: int, unrestricted: bool = False) -> Tuple[Fraction, bool]:
    if sys.ambient == "unit_interval":
        lo, hi = ball.interval()
        mB = hi - lo
        if mB <= 0:
            raise DomainError("degenerate ball")
        rho_u = radius_at(sys.rho, sys, n)
        if sys.name == RATIONALS and window_values_are_full_farey(sys, n):
            # for base >= 2 the window's point values are all of F_Q already,
            # so the windowed and unrestricted forms have equal unions
            Q = sys.window(n)[1]
            m = rationals_union_measure_exact(Q, rho_u, lo, hi)
            return m / mB, True
        region = build_delta(sys, n, sys.rho, ball, weights_from_one=unrestricted)
        return region.measure_within(ball) / mB, True
    if sys.ambient == "unit_circle":
        region = build_delta(sys, n, sys.rho, ball, weights_from_one=unrestricted)
        mB = min(2 * Fraction(ball.radius), Fraction(1))
        return region.measure_within(ball) / mB, True
    # strips: statistical
    region = build_delta(sys, n, sys.rho, None, seed=seed, weights_from_one=unrestricted)
    val, err = region_measure(region, ball)
    cx, cy = float(ball.center[0]), float(ball.center[1])
    mB = disc_square_area((cx, cy), float(ball.radius))
    return Fraction(str(max(val - err, 0.0) / mB)), False


# ---------------------------------------------------------------------------
# intersection conditions for the line system
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntersectionReport:
    c1_est: float
    c2_est: float
    violations: Tuple[dict, ...]
    samples: Tuple[dict, ...] = field(default=(), compare=False)

    def to_dict(self):
        return {
            "c1_est": self.c1_est,
            "c2_est": self.c2_est,
            "violations": list(self.violations),
            "samples": list(self.samples),
        }


def verify_intersection_conditions(
    sys: ResonantSystem,
    n: int,
    lambdas: Sequence[float] = (),
    max_lines: int = 40,
) -> IntersectionReport:
    """Empirical constants for the two ball/thickening inequalities.

    For point systems both inequalities are vacuous and the report is
    (1, 1, no violations).  For the line system, concentric balls centred on
    in-square line points are sampled in the interior regime; lines whose
    in-square segment cannot stay rho(u_n) away from the boundary are listed
    as violations (excluded, not failed).
    """
    if sys.gamma == 0:
        return IntersectionReport(1.0, 1.0, ())
    if sys.name != LINES21:
        raise DomainError("intersection conditions are implemented for the line system")
    rho_u = float(radius_at(sys.rho, sys, n))
    lambdas = list(lambdas) or [rho_u / 4, rho_u / 8, rho_u / 16]
    if any(l > rho_u for l in lambdas):
        raise DomainError("thickening width must not exceed rho(u_n)")
    lines = enumerate_window(sys, n, None)[:max_lines]
    c1, c2 = math.inf, 0.0
    samples, violations = [], []
    for el in lines:
        center = _interior_point(el, margin=rho_u)
        if center is None:
            violations.append({"line": list(el.geometry), "reason": "no interior point at margin"})
            continue
        for lam in lambdas:
            mBlam = disc_square_area(center, lam)
            # lower inequality, ball radius rho/2 and thickening lam
            lhs1 = disc_strip_square_area(el.geometry, center, rho_u / 2, lam)
            rhs1_shape = mBlam * (rho_u / lam) ** float(sys.gamma)
            r1 = lhs1 / rhs1_shape
            # upper inequality on concentric balls of radius <= 3 rho
            rB = 3 * rho_u
            lhs2 = disc_strip_square_area(el.geometry, center, rB, 3 * lam)
            rhs2_shape = mBlam * (rB / lam) ** float(sys.gamma)
            r2 = lhs2 / rhs2_shape
            c1, c2 = min(c1, r1), max(c2, r2)
            samples.append({"line": list(el.geometry), "lambda": lam, "ratio1": r1, "ratio2": r2})
    if not samples:
        raise DomainError("no interior-regime samples available at this level")
    return IntersectionReport(c1, c2, tuple(violations), tuple(samples))


def _interior_point(el, margin: float) -> Optional[Tuple[float, float]]:
    p, q1, q2 = el.geometry
    lo, hi = margin, 1.0 - margin
    if lo >= hi:
        return None
    pts = []
    for x in (lo, hi):
        if q2 != 0:
            y = (p - q1 * x) / q2
            if lo - 1e-12 <= y <= hi + 1e-12:
                pts.append((x, y))
    for y in (lo, hi):
        if q1 != 0:
            x = (p - q2 * y) / q1
            if lo - 1e-12 <= x <= hi + 1e-12:
                pts.append((x, y))
    if q1 == 0:
        y = p / q2
        if lo <= y <= hi:
            pts = [(lo, y), (hi, y)]
    if q2 == 0:
        x = p / q1
        if lo <= x <= hi:
            pts = [(x, lo), (x, hi)]
    if len(pts) < 2:
        return None
    (x1, y1), (x2, y2) = pts[0], pts[-1]
    return ((x1 + x2) / 2, (y1 + y2) / 2)


# ---------------------------------------------------------------------------
# separated-ball skeletons A_n and quasi-independence on average
# ---------------------------------------------------------------------------


@dataclass
class SeparatedBallSet:
    """A_n: disjoint balls of one radius at selected window point values.

    Centres are reduced fractions stored as int64 numerator/denominator
    arrays in increasing order, with a float shadow for searching; all
    measure arithmetic consults the exact values near interval edges.
    """

    n: int
    radius: Fraction
    nums: np.ndarray
    dens: np.ndarray
    floats: np.ndarray
    spacing: Fraction  # guaranteed minimal gap between centres

    def __len__(self):
        return len(self.nums)

    def center(self, i: int) -> Fraction:
        return Fraction(int(self.nums[i]), int(self.dens[i]))

    @property
    def measure(self) -> Fraction:
        if len(self) == 0:
            return Fraction(0)
        total = 2 * self.radius * len(self)
        first, last = self.center(0), self.center(len(self) - 1)
        total -= max(Fraction(0), self.radius - first)
        total -= max(Fraction(0), (last + self.radius) - 1)
        return total

    def to_interval_union(self) -> IntervalUnion:
        return IntervalUnion.from_balls([self.center(i) for i in range(len(self))], self.radius)


def _greedy_farey_centers(Q: int, two_rho: Fraction, lo: Fraction, hi: Fraction) -> Tuple[list, list]:
    """Left-to-right maximal selection of F_Q members in [lo, hi] with gaps
    strictly above two_rho (unreduced integer targets keep this fast)."""
    nums, dens = [], []
    a, b = farey_geq(max(lo, Fraction(0)), Q)
    hn, hd = hi.numerator, hi.denominator
    tn, td = two_rho.numerator, two_rho.denominator
    while a * hd <= hn * b:
        nums.append(a)
        dens.append(b)
        a, b = farey_gt(a * td + tn * b, b * td, Q)
    return nums, dens


def build_A_sets(
    sys: ResonantSystem,
    psi: ExtendedLogPower,
    ball: Optional[Ball],
    n_values: Sequence[int],
    g_cap: int = 20_000_000,
) -> List[SeparatedBallSet]:
    """Selected-centre ball unions A_n inside the ball, one per window.

    Centres are a maximal 2*rho(u_n)-separated subset of the window's point
    values restricted to the half ball (the full space when the ball is the
    ambient); each then carries a psi(u_n)-ball.  Requires
    psi(u_n) < rho(u_n)/24 at every requested level.
    """
    if sys.name != RATIONALS:
        raise DomainError("separated-ball sets are built for the rational system")
    out = []
    ambient = ball is None or (Fraction(ball.radius) >= Fraction(1, 2))
    n_values = list(n_values)
    for n in n_values:  # validate the whole request before building anything
        rho_u = radius_at(sys.rho, sys, n)
        psi_u = radius_at(psi, sys, n)
        if not psi_u < rho_u / 24:
            raise LimsupBranchError(
                f"psi(u_{n}) >= rho(u_{n})/24: use the large-ratio branch of the positive-measure law"
            )
        if not window_values_are_full_farey(sys, n):
            raise DomainError("windows too narrow for the reduced-value shortcut (need k >= 2)")
        predicted = 1.0 / (2 * float(rho_u))
        if predicted > g_cap:
            raise ResourceCapError(
                f"A_{n} predicts ~{predicted:.3g} separated balls over cap {g_cap}",
                predicted=predicted, cap=g_cap,
            )
    for n in n_values:
        rho_u = radius_at(sys.rho, sys, n)
        psi_u = radius_at(psi, sys, n)
        Q = sys.window(n)[1]
        if ambient:
            lo, hi = Fraction(0), Fraction(1)
        else:
            c = Fraction(ball.center)
            r = Fraction(ball.radius) / 2  # half ball
            lo, hi = max(Fraction(0), c - r), min(Fraction(1), c + r)
        nums, dens = _greedy_farey_centers(Q, 2 * rho_u, lo, hi)
        nn = np.array(nums, dtype=np.int64)
        dd = np.array(dens, dtype=np.int64)
        out.append(SeparatedBallSet(n, psi_u, nn, dd, nn / dd, 2 * rho_u))
    return out


def separated_set_intersection(a: SeparatedBallSet, b: SeparatedBallSet) -> Fraction:
    """Exact measure of the overlap of two separated-ball unions.

    Bulk counts use the float shadows with a guard band; every candidate near
    an edge is settled with exact rational arithmetic.
    """
    if len(a) == 0 or len(b) == 0:
        return Fraction(0)
    if a.radius < b.radius:
        a, b = b, a
    band = 1e-9
    ra, rb = float(a.radius), float(b.radius)
    total = Fraction(0)
    inner = ra - rb
    outer = ra + rb
    two_rb = 2 * b.radius
    for i in range(len(a)):
        c = a.floats[i]
        i0 = int(np.searchsorted(b.floats, c - outer - band, side="left"))
        i1 = int(np.searchsorted(b.floats, c + outer + band, side="right"))
        if i0 >= i1:
            continue
        j0 = int(np.searchsorted(b.floats, c - inner + band, side="left"))
        j1 = int(np.searchsorted(b.floats, c + inner - band, side="right"))
        ca = a.center(i)
        alo, ahi = max(ca - a.radius, Fraction(0)), min(ca + a.radius, Fraction(1))
        if j1 > j0:
            total += two_rb * (j1 - j0)
            # interior bulk assumes no ambient clipping: exact for balls away
            # from 0 and 1; first/last members are re-checked below
            for j in {j0, j1 - 1}:
                cb = b.center(j)
                clip = min(cb + b.radius, Fraction(1)) - max(cb - b.radius, Fraction(0))
                total += clip - two_rb  # correct any clip at 0/1
        for j in list(range(i0, min(j0, i1))) + list(range(max(j1, i0), i1)):
            cb = b.center(j)
            blo, bhi = max(cb - b.radius, Fraction(0)), min(cb + b.radius, Fraction(1))
            ov = min(ahi, bhi) - max(alo, blo)
            if ov > 0:
                total += ov
    return total


@dataclass(frozen=True)
class QuasiIndependenceReport:
    Q: int
    single_sums: Fraction
    pair_sums: Fraction
    ball_measure: Fraction
    per_n: Tuple[Tuple[int, Fraction], ...]
    counts: Tuple[int, ...]

    @property
    def ratio(self) -> Fraction:
        """R(Q) = pair sums * m(B) / single sums squared."""
        return self.pair_sums * self.ball_measure / self.single_sums**2

    @property
    def borel_cantelli_bound(self) -> Fraction:
        return self.single_sums**2 / self.pair_sums

    def to_dict(self):
        return {
            "Q": self.Q,
            "single_sums": float(self.single_sums),
            "pair_sums": float(self.pair_sums),
            "ratio": float(self.ratio),
            "borel_cantelli_bound": float(self.borel_cantelli_bound),
            "per_n": [[n, float(m)] for n, m in self.per_n],
            "counts": list(self.counts),
        }


def _ball_measure(ball: Optional[Ball]) -> Fraction:
    if ball is None:
        return Fraction(1)
    c, r = Fraction(ball.center), Fraction(ball.radius)
    return min(Fraction(1), c + r) - max(Fraction(0), c - r)


def quasi_independence_table(
    sys: ResonantSystem,
    psi: ExtendedLogPower,
    ball: Optional[Ball],
    Q: int,
    g_cap: int = 20_000_000,
) -> List[QuasiIndependenceReport]:
    """Reports at every horizon q = 1..Q, sharing one pairwise matrix."""
    sets = build_A_sets(sys, psi, ball, range(1, Q + 1), g_cap=g_cap)
    singles = [s.measure for s in sets]
    inter = {}
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            inter[(i, j)] = separated_set_intersection(sets[i], sets[j])
    mB = _ball_measure(ball)
    out = []
    for q in range(1, Q + 1):
        single_sums = sum(singles[:q], Fraction(0))
        pair = sum(singles[:q], Fraction(0))
        for i in range(q):
            for j in range(i + 1, q):
                pair += 2 * inter[(i, j)]
        out.append(QuasiIndependenceReport(
            q, single_sums, pair, mB,
            tuple((s.n, m) for s, m in zip(sets[:q], singles[:q])),
            tuple(len(s) for s in sets[:q]),
        ))
    return out


def verify_quasi_independence(
    sys: ResonantSystem,
    psi: ExtendedLogPower,
    ball: Optional[Ball],
    Q: int,
    g_cap: int = 20_000_000,
) -> QuasiIndependenceReport:
    """Exact single and pairwise measures of A_1..A_Q and the divergence
    lower bound (sum m(A_s))^2 / (sum m(A_s cap A_t)) at horizon Q."""
    return quasi_independence_table(sys, psi, ball, Q, g_cap=g_cap)[-1]
