"""Verdict engine: dichotomies, zero-infinity law, critical exponents, traces."""

from fractions import Fraction

import pytest

from limsuplab.errors import DomainError
from limsuplab.funcs import ExtendedLogPower, parse_literal as lit
from limsuplab.laws import (
    Hausdorff,
    Lebesgue,
    ambient_cover_sum,
    classify,
    critical_dimension,
    hausdorff_verdict,
    lebesgue_verdict,
    natural_cover_sum,
)
from limsuplab.systems import (
    UBIQUITY_NONE,
    UBIQUITY_VERIFIED,
    algebraic,
    circle,
    lines21,
    prime_rationals,
    rationals,
)


class TestLebesgue:
    def test_dichotomy_on_rationals(self):
        R = rationals()
        assert lebesgue_verdict(R, lit("1 * r^-2")).lebesgue is Lebesgue.FULL
        assert lebesgue_verdict(R, lit("1 * r^-2 * logr^-2")).lebesgue is Lebesgue.ZERO

    def test_prime_restricted_log_region(self):
        P = prime_rationals()
        assert lebesgue_verdict(P, lit("1 * r^-2 * logr^-3")).lebesgue is Lebesgue.ZERO
        assert lebesgue_verdict(P, lit("1 * r^-2 * logr^-1.5")).lebesgue is Lebesgue.ZERO
        # divergence needs a full extra log power
        assert lebesgue_verdict(P, lit("1 * r^-2 * logr^1")).lebesgue is Lebesgue.FULL

    def test_evidence_flag_degrades_verdict(self):
        psi = lit("1 * r^-2")
        assert lebesgue_verdict(rationals().with_ubiquity(UBIQUITY_VERIFIED), psi).lebesgue is Lebesgue.POSITIVE
        v = lebesgue_verdict(rationals().with_ubiquity(UBIQUITY_NONE), psi)
        assert v.lebesgue is Lebesgue.UNKNOWN
        assert any(t.status == "failed" for t in v.trace)

    def test_increasing_psi_rejected_in_trace(self):
        v = lebesgue_verdict(rationals(), lit("1 * r^1"))
        assert v.lebesgue is Lebesgue.UNKNOWN
        assert v.trace[-1].tag == "psi.decreasing" and v.trace[-1].status == "failed"

    def test_gamma_equals_delta_uses_short_route(self):
        import dataclasses

        sys = dataclasses.replace(lines21(k=2), gamma=Fraction(2))  # hypothetical
        v = lebesgue_verdict(sys, lit("1 * r^-4"))
        assert v.lebesgue is Lebesgue.FULL
        assert any(t.tag == "dichotomy.gamma-eq-delta" for t in v.trace)

    def test_large_ratio_branch(self):
        # psi comparable to rho: positive measure without any regularity check
        R = rationals()
        v = lebesgue_verdict(R, lit("1 * r^-2 * logr^1"))
        assert v.lebesgue is Lebesgue.FULL
        assert any(t.tag == "dichotomy.limsup-ratio" for t in v.trace)


class TestHausdorff:
    def test_zero_infinity_pair(self):
        R = rationals()
        f = lit("1 * r^2/3 * logr^0.2")
        assert hausdorff_verdict(R, lit("1 * r^-3 * logr^-1.8"), f).hausdorff is Hausdorff.INFINITE
        assert hausdorff_verdict(R, lit("1 * r^-3 * logr^-2.1"), f).hausdorff is Hausdorff.ZERO

    def test_critical_gauge_infinite(self):
        for tau in (3, 4):
            v = hausdorff_verdict(rationals(), lit(f"1 * r^-{tau}"), lit(f"1 * r^{Fraction(2, tau)}"))
            assert v.hausdorff is Hausdorff.INFINITE

    def test_prime_restricted_zero_at_critical(self):
        v = hausdorff_verdict(prime_rationals(), lit("1 * r^-3"), lit("1 * r^2/3"))
        assert v.hausdorff is Hausdorff.ZERO

    def test_ambient_gauge_not_applicable(self):
        v = hausdorff_verdict(rationals(), lit("1 * r^-3"), lit("1 * r^1"))
        assert v.hausdorff is Hausdorff.NOT_APPLICABLE
        assert v.guards

    def test_gamma_equals_delta_not_applicable(self):
        import dataclasses

        sys = dataclasses.replace(lines21(k=2), gamma=Fraction(2))
        v = hausdorff_verdict(sys, lit("1 * r^-4"), lit("1 * r^1.5"))
        assert v.hausdorff is Hausdorff.NOT_APPLICABLE

    def test_circle_guard(self):
        C = circle()
        ok = hausdorff_verdict(C, lit("1 * r^-3"), lit("1 * r^1/3"))
        assert ok.hausdorff is Hausdorff.INFINITE
        bad = hausdorff_verdict(C, lit("1 * r^-1.5"), lit("1 * r^1/3"))
        assert bad.hausdorff is Hausdorff.UNKNOWN and bad.guards

    def test_needs_local_evidence(self):
        v = hausdorff_verdict(rationals().with_ubiquity(UBIQUITY_VERIFIED), lit("1 * r^-3"), lit("1 * r^2/3"))
        assert v.hausdorff is Hausdorff.UNKNOWN

    def test_lines_zero_side(self):
        # gauge above the critical exponent: cover sum converges
        v = hausdorff_verdict(lines21(), lit("1 * r^-4"), lit("1 * r^1.9"))
        assert v.hausdorff is Hausdorff.ZERO


class TestTraceCompleteness:
    def test_non_unknown_lists_all_satisfied(self):
        v = hausdorff_verdict(rationals(), lit("1 * r^-3"), lit("1 * r^2/3"))
        assert v.hausdorff is not Hausdorff.UNKNOWN
        assert all(t.status in ("satisfied", "claimed") for t in v.trace)
        tags = {t.tag for t in v.trace}
        assert {"psi.decreasing", "gauge.shape", "cover.sum", "zero-infinity.G", "ubiquity.local"} <= tags

    def test_unknown_names_first_failure(self):
        v = lebesgue_verdict(rationals().with_ubiquity(UBIQUITY_NONE), lit("1 * r^-2"))
        failed = [t for t in v.trace if t.status == "failed"]
        assert failed and failed[0].tag.startswith("ubiquity")


class TestDimension:
    @pytest.mark.parametrize(
        "sysf,psi,sigma,d",
        [
            (rationals, "1 * r^-3", "2/3", "2/3"),
            (rationals, "1 * r^-4", "1/2", "1/2"),
            (prime_rationals, "1 * r^-3", "2/3", "2/3"),
            (circle, "1 * r^-3", "1/3", "1/3"),
            (lines21, "1 * r^-4", "3/4", "7/4"),
        ],
    )
    def test_exact_values(self, sysf, psi, sigma, d):
        res = critical_dimension(sysf(), lit(psi))
        assert res.sigma == Fraction(sigma)
        assert res.dimension == Fraction(d)

    def test_algebraic_dimension(self):
        for deg in (2, 3):
            tau = 2
            res = critical_dimension(algebraic(deg), lit(f"1 * r^-{(deg + 1) * tau}"))
            assert res.dimension == Fraction(1, tau)
            assert res.hausdorff_at_d == "infinite"

    def test_zero_exponent_rejected(self):
        with pytest.raises(DomainError):
            critical_dimension(rationals(), lit("1 * logr^-2"))

    def test_lines_flag_via_divergent_g_sum(self):
        res = critical_dimension(lines21(), lit("1 * r^-4"))
        assert res.hausdorff_at_d == "infinite"

    def test_prime_flag_unknown(self):
        res = critical_dimension(prime_rationals(), lit("1 * r^-3"))
        assert res.hausdorff_at_d == "unknown"

    def test_coarse_psi_gives_ambient_dimension(self):
        res = critical_dimension(rationals(), lit("1 * r^-2"))
        assert res.dimension == Fraction(1)

    def test_consistency_grid_around_d(self):
        # s-gauges strictly between the common dimension and d give infinite
        # measure; above d the cover sum kills it
        for sysf, psi in ((rationals, "1 * r^-3"), (circle, "1 * r^-3"), (lines21, "1 * r^-4")):
            sys = sysf()
            res = critical_dimension(sys, lit(psi))
            if res.hausdorff_at_d != "infinite":
                continue
            d = res.dimension
            lo = float(sys.gamma)
            for ds in (-0.2, -0.05, -1e-3, 1e-3, 0.05, 0.2):
                s = float(d) + ds
                if not lo + 1e-9 < s < float(sys.delta) - 1e-9:
                    continue
                v = hausdorff_verdict(sys, lit(psi), ExtendedLogPower(1, Fraction(str(round(s, 6)))))
                want = Hausdorff.INFINITE if ds < 0 else Hausdorff.ZERO
                assert v.hausdorff is want, (sys.name, s, v.hausdorff)


class TestCoverSums:
    def test_identity_and_ambient_routes(self):
        R = rationals()
        psi = lit("1 * r^-2")
        via_delta = natural_cover_sum(R, psi, lit("1 * r^1"))
        assert via_delta.klass == ambient_cover_sum(R, psi).klass

    def test_circle_gauge_sum(self):
        # for the circle the cover sum condenses to sum_r f(psi(r))
        C = circle()
        assert natural_cover_sum(C, lit("1 * r^-3"), lit("1 * r^1/2")).converges
        assert natural_cover_sum(C, lit("1 * r^-3"), lit("1 * r^1/4")).diverges
