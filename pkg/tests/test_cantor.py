"""Nested-ball construction: constants, planning, building, mass, audit."""

from fractions import Fraction

import pytest

from limsuplab import cantor
from limsuplab.cantor import (
    BRANCH_FINITE,
    BRANCH_INFINITE,
    CantorTree,
    Level,
    PlanConstants,
    SubLevel,
    assign_mass,
    audit_mass,
    build_levels,
    plan_construction,
    verify_tree,
)
from limsuplab.errors import ConstructionError, DomainError, InfeasibleError
from limsuplab.funcs import parse_literal as lit
from limsuplab.geometry import Ball
from limsuplab.systems import rationals

PSI = lit("1 * r^-3")
F23 = lit("1 * r^2/3")
F12 = lit("1 * r^1/2")


def small_plan(**kw):
    args = dict(eta=3, mode="relaxed", varpi="0.1", kappa=Fraction(1, 2), depth=2,
                caps={"sublevel_balls": 2000})
    args.update(kw)
    return plan_construction(rationals(k=2), PSI, F23, **args)


class TestConstants:
    def test_exact_derivation(self):
        cons = PlanConstants.derive(rationals(k=6), Fraction(1, 2))
        assert cons.c3 == Fraction(1, 144)
        assert cons.c4 == Fraction(1, 18)
        assert cons.varpi == Fraction(1, 995328)
        assert cons.lambda_bound == Fraction(1, 49)
        assert cons.c6 == Fraction(2) / (cons.c3 * cons.c4)

    def test_varpi_override_bounds(self):
        with pytest.raises(DomainError):
            PlanConstants.derive(rationals(k=6), Fraction(1, 2), Fraction(2))

    def test_point_system_required(self):
        from limsuplab.systems import lines21

        with pytest.raises(DomainError):
            plan_construction(lines21(), PSI, F23, eta=3)


class TestPlanning:
    def test_branch_selection(self):
        assert small_plan().branch == BRANCH_FINITE
        p = plan_construction(rationals(k=2), PSI, F12, eta=3, mode="relaxed", varpi="0.1")
        assert p.branch == BRANCH_INFINITE

    def test_paper_mode_reports_required_scale(self):
        with pytest.raises(InfeasibleError) as ei:
            plan_construction(rationals(k=6), PSI, F23, eta=10, mode="paper")
        assert ei.value.required == pytest.approx(3 * 10 * 995328, rel=1e-9)

    def test_relaxed_plan_records_checks(self):
        plan = plan_construction(rationals(k=6), PSI, F23, eta=10, mode="relaxed", varpi="0.1")
        names = {c.name: c.satisfied for c in plan.checks}
        assert names["t1.upper-inequality"] and names["t1.gauge-inequality"]
        assert not names["thinning.lambda-bound"]  # decay 1/36 vs bound 1/49
        assert not names["k1.bracket-lower"]       # capped for feasibility

    def test_eta_must_beat_G_star(self):
        with pytest.raises(DomainError):
            small_plan(eta=1)

    def test_thinning_prefers_pruning_sublevels(self):
        plan = plan_construction(rationals(k=7), PSI, F23, eta=3, mode="relaxed", varpi="0.1")
        assert plan.stride == 1 and plan.k1 >= 1

    def test_gauge_between_dimensions_required(self):
        with pytest.raises(DomainError):
            plan_construction(rationals(k=2), PSI, lit("1 * r^1"), eta=3, mode="relaxed")

    def test_varpi_only_in_relaxed(self):
        with pytest.raises(DomainError):
            plan_construction(rationals(k=2), PSI, F23, eta=3, mode="paper", varpi="0.1")

    def test_relaxed_hundredth_varpi_first_level(self):
        # varpi = 0.01 at base 6 satisfies both first-level inequalities by t = 6
        plan = plan_construction(rationals(k=6), PSI, F23, eta=10, mode="relaxed",
                                 varpi="0.01", kappa=Fraction(1, 2), depth=1)
        assert plan.t_schedule[0] <= 6
        names = {c.name: c.satisfied for c in plan.checks}
        assert names["t1.upper-inequality"] and names["t1.gauge-inequality"]


class TestBuild:
    def test_finite_depth2(self):
        plan = small_plan()
        tree = build_levels(plan)
        assert len(tree.levels) == 2
        lv1 = tree.levels[0]
        assert len(lv1.sublevels) == plan.k1 + 1
        # selected radii follow the schedule
        for s in lv1.sublevels:
            assert s.radius == plan.psi_at(s.t)
        assign_mass(tree)
        checks = verify_tree(tree)
        assert all(checks.values()), checks

    def test_infinite_depth2(self):
        plan = plan_construction(rationals(k=2), PSI, F12, eta=3, mode="relaxed", varpi="0.1", depth=2)
        tree = build_levels(plan)
        assign_mass(tree)
        assert all(verify_tree(tree).values())
        # counting masses: every level-2 ball carries parent mass / block size
        import collections

        cnt = collections.Counter(tree.levels[1].parents)
        for i in (0, len(tree.levels[1]) - 1):
            pi = tree.levels[1].parents[i]
            assert tree.masses[1][i] == tree.masses[0][pi] / cnt[pi]

    def test_within_ball(self):
        plan = small_plan(depth=1, within=Ball(Fraction(1, 2), Fraction(1, 4), "unit_interval"))
        tree = build_levels(plan, within=Ball(Fraction(1, 2), Fraction(1, 4), "unit_interval"))
        for i in range(len(tree.levels[0])):
            assert abs(tree.levels[0].center(i) - Fraction(1, 2)) <= Fraction(1, 8)

    def test_empty_ball_raises(self):
        plan = small_plan(depth=1)
        tiny = Ball(Fraction(1, 3) + Fraction(1, 10**12), Fraction(1, 10**11), "unit_interval")
        with pytest.raises(ConstructionError):
            build_levels(plan, within=tiny)

    def test_pruning_and_half_survival(self):
        plan = small_plan()
        tree = build_levels(plan)
        subs = tree.levels[0].sublevels
        assert len(subs) >= 2
        for s in subs[1:]:
            assert s.v_count >= (s.g_count + 1) // 2
        # thickening guard holds on every pruned sub-level
        assert all(g for g in tree.levels[0].guard_by_sub if g is not None)


class TestMass:
    def test_single_chain_normalizes_to_one(self):
        plan = small_plan(depth=1)
        r1, r2 = Fraction(1, 100), Fraction(1, 10000)
        chain = CantorTree(plan, [
            Level(1, [SubLevel(3, r1, Fraction(1, 10), 1, 1)], [1], [3], [0], [-1], [3], [None], [None]),
            Level(2, [SubLevel(6, r2, Fraction(1, 1000), 1, 1)], [10], [33], [0], [0], [66], [None], [None]),
        ])
        assign_mass(chain)
        assert chain.masses == [[Fraction(1)], [Fraction(1)]]

    def test_equal_radii_equal_masses(self):
        plan = small_plan()
        tree = assign_mass(build_levels(plan))
        lv = tree.levels[0]
        by_sub = {}
        for i in range(len(lv)):
            by_sub.setdefault(lv.subs[i], set()).add(tree.masses[0][i])
        for masses in by_sub.values():
            assert len(masses) == 1

    def test_conservation_is_exact(self):
        tree = assign_mass(build_levels(small_plan()))
        assert sum(tree.masses[0], Fraction(0)) == 1
        assert verify_tree(tree)["mass_conservation"]


class TestAudit:
    def test_flag_implication_and_reporting(self):
        tree = assign_mass(build_levels(small_plan()))
        rep = audit_mass(tree, samples=300, seed=3)
        assert rep.construction_max_ratio > 0
        if rep.flagged_bound_ok is not None:
            assert rep.flagged_bound_ok  # bound proved wherever the chain checks held
        assert rep.mdp_bound > 0
        assert all(rep.structure.values())

    def test_construction_ball_equals_arbitrary_ratio(self):
        tree = assign_mass(build_levels(small_plan()))
        lv = tree.levels[-1]
        i = len(lv) // 2
        c, r = lv.center(i), lv.radius(i)
        # the estimator over the deepest level at exactly this ball
        mass = sum(tree.masses[-1][j] for j in range(len(lv))
                   if abs(lv.center(j) - c) <= r + lv.radius(j))
        assert mass == tree.masses[-1][i]

    def test_two_seed_stability(self):
        tree = assign_mass(build_levels(small_plan()))
        a = audit_mass(tree, samples=1000, seed=1).arbitrary_max_ratio
        b = audit_mass(tree, samples=1000, seed=2).arbitrary_max_ratio
        assert a > 0 and b > 0
        assert abs(a - b) <= 0.2 * max(a, b)

    def test_jsonl_round_trip(self, tmp_path):
        import json

        tree = assign_mass(build_levels(small_plan(depth=1)))
        path = tmp_path / "tree.jsonl"
        with open(path, "w") as fh:
            tree.to_jsonl(fh)
        lines = [json.loads(l) for l in open(path)]
        assert len(lines) == len(tree.levels[0])
        assert {l["level"] for l in lines} == {1}
        total = sum(Fraction(l["mass_num"], l["mass_den"]) for l in lines)
        assert total == 1
