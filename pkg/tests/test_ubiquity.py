"""Locating-capture ratios, intersection constants, skeleton sets."""

import math
from fractions import Fraction

import pytest

from limsuplab.errors import DomainError, LimsupBranchError, ResourceCapError
from limsuplab.funcs import ExtendedLogPower, parse_literal
from limsuplab.geometry import Ball
from limsuplab.regions import build_delta, radius_at
from limsuplab.systems import circle, lines21, prime_rationals, rationals
from limsuplab.ubiquity import (
    build_A_sets,
    quasi_independence_table,
    rationals_union_measure_exact,
    separated_set_intersection,
    verify_intersection_conditions,
    verify_local_ubiquity,
    verify_quasi_independence,
)

FULL = Ball(Fraction(1, 2), Fraction(1, 2), "unit_interval")


class TestCaptureRatio:
    def test_fast_path_equals_generic_sweep(self):
        sys = rationals(k=6)
        for n in (1, 2, 3):
            r = radius_at(sys.rho, sys, n)
            Q = sys.window(n)[1]
            for lo, hi in ((Fraction(0), Fraction(1)), (Fraction(3, 10), Fraction(1, 2)),
                           (Fraction(7, 11), Fraction(9, 11))):
                ball = Ball((lo + hi) / 2, (hi - lo) / 2, "unit_interval")
                sweep = build_delta(sys, n, sys.rho, ball).measure_within(ball)
                assert rationals_union_measure_exact(Q, r, lo, hi) == sweep

    def test_half_capture_at_base_six(self):
        sys = rationals(k=6)
        balls = [FULL, Ball(Fraction(2, 5), Fraction(1, 10), "unit_interval")]
        rep = verify_local_ubiquity(sys, balls, [2, 3], kappa_claim=Fraction(1, 2))
        assert rep.passed and all(c.exact for c in rep.cases)

    def test_whole_space_ratio_is_measure(self):
        # with the ball equal to the ambient the ratio is just the union measure
        sys = rationals(k=4)
        rep = verify_local_ubiquity(sys, [FULL], [2])
        region = build_delta(sys, 2, sys.rho, None)
        assert rep.cases[0].ratio == region.measure

    def test_prime_system_generic_path(self):
        sys = prime_rationals(k=2)
        rep = verify_local_ubiquity(sys, [FULL], [4])
        assert 0 < rep.kappa_min < 1 and rep.cases[0].exact

    def test_circle_arcs(self):
        sys = circle(k=4)
        arcs = [Ball(Fraction(1, 3), Fraction(1, 10), "unit_circle"), Ball(Fraction(0), Fraction(1, 10), "unit_circle")]
        rep = verify_local_ubiquity(sys, arcs, [3, 4, 5])
        assert rep.kappa_min > 0  # recorded as calibration, not asserted against a claim

    def test_small_ball_warning_flag(self):
        sys = rationals(k=6)
        tiny = Ball(Fraction(1, 2), Fraction(1, 100), "unit_interval")
        rep = verify_local_ubiquity(sys, [tiny], [2])
        assert rep.cases[0].small_ball_warning

    def test_unrestricted_form_contains_windowed(self):
        # windowed unions sit inside the unrestricted ones; for the all-pairs
        # rational system at base >= 2 the two coincide exactly
        sys = prime_rationals(k=2)
        ball = FULL
        for n in (3, 4):
            win = verify_local_ubiquity(sys, [ball], [n]).cases[0].ratio
            unr = verify_local_ubiquity(sys, [ball], [n], unrestricted=True).cases[0].ratio
            assert unr >= win
        R = rationals(k=4)
        from limsuplab.regions import build_delta

        a = build_delta(R, 2, R.rho, None)
        b = build_delta(R, 2, R.rho, None, weights_from_one=True)
        assert a.measure == b.measure


class TestIntersectionConditions:
    def test_point_systems_trivial(self):
        rep = verify_intersection_conditions(rationals(k=6), 2)
        assert (rep.c1_est, rep.c2_est, rep.violations) == (1.0, 1.0, ())

    def test_lines_interior_constants(self):
        sys = lines21(k=2)
        rep = verify_intersection_conditions(sys, 2, max_lines=25)
        assert 0 < rep.c1_est <= 1.5
        assert rep.c2_est >= rep.c1_est > 0

    def test_lambda_scaling_stability(self):
        sys = lines21(k=2)
        rho_u = float(radius_at(sys.rho, sys, 2))
        per_lambda = []
        for lam in (rho_u / 4, rho_u / 8, rho_u / 16):
            rep = verify_intersection_conditions(sys, 2, lambdas=[lam], max_lines=25)
            per_lambda.append(rep.c1_est)
        assert max(per_lambda) / min(per_lambda) <= 2.0

    def test_width_above_rho_rejected(self):
        sys = lines21(k=2)
        with pytest.raises(DomainError):
            verify_intersection_conditions(sys, 2, lambdas=[1.0])


class TestASets:
    def setup_method(self):
        self.sys = rationals(k=6)
        self.psi = ExtendedLogPower(Fraction(6, 25), -2)  # rho / 25

    def test_balls_disjoint_and_inside_window_union(self):
        sets = build_A_sets(self.sys, self.psi, None, [1, 2])
        for s in sets:
            iu = s.to_interval_union()
            assert len(iu.intervals) == len(s)  # pairwise disjoint, no merging
            delta = build_delta(self.sys, s.n, self.psi, None)
            for i in range(len(s)):
                assert delta.contains_point(s.center(i))

    def test_guard_routes_large_psi(self):
        with pytest.raises(LimsupBranchError):
            build_A_sets(self.sys, self.sys.rho, None, [2])  # psi = rho fails the margin

    def test_counting_window(self):
        sets = build_A_sets(self.sys, self.psi, None, [3])
        s = sets[0]
        rho_u = radius_at(self.sys.rho, self.sys, 3)
        per_ball = 2 * rho_u  # disjoint locating balls
        assert Fraction(1, 4) <= len(s) * per_ball <= Fraction(3, 2)

    def test_half_ball_restriction(self):
        ball = Ball(Fraction(1, 2), Fraction(1, 5), "unit_interval")
        sets = build_A_sets(self.sys, self.psi, ball, [2])
        for i in range(len(sets[0])):
            assert abs(sets[0].center(i) - Fraction(1, 2)) <= Fraction(1, 10)

    def test_resource_cap(self):
        with pytest.raises(ResourceCapError):
            build_A_sets(self.sys, self.psi, None, [8], g_cap=10_000)


class TestQuasiIndependence:
    def setup_method(self):
        self.sys = rationals(k=6)
        self.psi = ExtendedLogPower(Fraction(6, 25), -2)

    def test_horizon_one(self):
        rep = verify_quasi_independence(self.sys, self.psi, None, 1)
        assert rep.ratio == 1 / rep.single_sums and rep.ratio >= 1

    def test_pairwise_exactness(self):
        sets = build_A_sets(self.sys, self.psi, None, [1, 2, 3])
        for i in range(3):
            for j in range(i + 1, 3):
                fast = separated_set_intersection(sets[i], sets[j])
                slow = sets[i].to_interval_union().intersect(sets[j].to_interval_union()).measure
                assert fast == slow

    def test_diagonal_dominures(self):
        rep = verify_quasi_independence(self.sys, self.psi, None, 3)
        assert rep.pair_sums >= rep.single_sums

    def test_bound_monotone(self):
        tab = quasi_independence_table(self.sys, self.psi, None, 4)
        bounds = [t.borel_cantelli_bound for t in tab]
        assert all(b2 >= b1 for b1, b2 in zip(bounds, bounds[1:]))
        assert all(b > 0 for b in bounds)
