"""Nested separated-ball constructions with an audited mass distribution.

For a point system (common dimension 0) in the unit interval this module
builds the leveled ball hierarchy whose intersection sits inside the limsup
set: each level places balls of radius psi(u_t) at separated window point
values inside half of each parent ball, sub-levels within the first level
avoid thickened copies of the earlier sub-levels, and a probability mass is
spread down the tree.  The audit then compares ball masses against
gauge(radius), which is exactly what the mass-distribution lower bound
consumes.

Two regimes, selected by the limit class of the mass-comparison function
g = f(psi) psi^-gamma rho^(gamma-delta) along u:

* bounded g ("finite-G"): levels carry blocks of sub-levels sized by partial
  sums of g(u_t), thickenings prune later sub-levels, and mass is weighted
  by gauge(radius) within each block;
* unbounded g ("infinite-G"): one sub-level per level, no pruning, and mass
  splits evenly by counting.

Running with the constants the theory prescribes pushes the first usable
level far beyond desk-scale enumeration for the concrete examples (the
planner reports the required scale).  Relaxed mode instead takes the
smallest feasible schedule with user-chosen varpi/kappa, and every
inequality those constants were designed to guarantee (half-survival under
pruning, the block gauge-sum bounds, the per-ball mass bound) is checked at
run time and reported instead of assumed.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConstructionError, DomainError, InfeasibleError
from .farey import farey_geq, farey_gt
from .funcs import ExtendedLogPower, GClass, GeometricSequence, condense_over_u, limsup_G, rational_pow
from .geometry import Ball, round_down
from .systems import RATIONALS, ResonantSystem

MODE_PAPER = "paper"
MODE_RELAXED = "relaxed"
BRANCH_FINITE = "finite-G"
BRANCH_INFINITE = "infinite-G"

DEFAULT_CAPS = {
    "t_max": 40,
    "first_level_min": 4,       # smallest usable first-level selection
    "sublevel_balls": 200_000,  # largest first-level sub-level selection
    "block_balls": 16,          # per-parent selection at deeper levels
    "total_balls": 2_000_000,
}


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanConstants:
    a: Fraction
    b: Fraction
    delta: Fraction
    gamma: Fraction
    kappa: Fraction
    kappa1: Fraction
    c1: Fraction
    c2: Fraction
    c3: Fraction
    c4: Fraction
    c5: Fraction
    c6: Fraction
    varpi: Fraction
    lambda_bound: Fraction

    @staticmethod
    def derive(sys: ResonantSystem, kappa, varpi_override=None) -> "PlanConstants":
        a, b = sys.measure_constants
        delta, gamma = sys.delta, sys.gamma
        if gamma != 0:
            raise DomainError("construction implemented for point systems (common dimension 0)")
        kappa = Fraction(kappa)
        kappa1 = kappa  # local capture applied to the whole space gives the global constant
        c1 = Fraction(1)  # for point sets both intersection inequalities are identities
        c2 = Fraction(1)
        p3 = rational_pow(Fraction(3), delta) or Fraction(3)
        p9 = rational_pow(Fraction(9), delta) or Fraction(9)
        p36 = rational_pow(Fraction(36), delta) or Fraction(36)
        c3 = min(a * kappa / (b * p36), kappa1 / (b * p9))
        c4 = c1 * a / (p9 * b)
        c5 = c2 * b / a
        varpi = c3 * c4 * a / (p3 * 32 * b * b * c2)
        if varpi_override is not None:
            varpi = Fraction(varpi_override)
        if not 0 < varpi < 1:
            raise DomainError("varpi must lie in (0, 1)")
        lam_inner = a / (a + p3 * 8 * b * c2)
        lam = rational_pow(lam_inner, Fraction(1) / (delta - gamma))
        if lam is None:
            lam = Fraction(str(float(lam_inner) ** (1.0 / float(delta - gamma))))
        return PlanConstants(a, b, delta, gamma, kappa, kappa1, c1, c2, c3, c4, c5,
                             2 / (c3 * c4), varpi, lam)


@dataclass
class PlanCheck:
    name: str
    satisfied: bool
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "satisfied": self.satisfied, "detail": self.detail}


@dataclass
class ConstructionPlan:
    branch: str
    mode: str
    eta: Fraction
    sys: ResonantSystem
    psi: ExtendedLogPower
    f: ExtendedLogPower
    constants: PlanConstants
    G_star: float
    base: Fraction              # effective sequence base (k^stride after thinning)
    stride: int
    t_schedule: List[int]       # t_1 < t_2 < ... on the effective sequence
    k1: int                     # extra sub-levels at the first level
    depth: int
    checks: List[PlanCheck] = field(default_factory=list)
    caps: Dict[str, int] = field(default_factory=dict)
    _g_elp: Optional[ExtendedLogPower] = field(default=None, repr=False, compare=False)

    # -- evaluations along the effective sequence ------------------------

    def u(self, t: int) -> Fraction:
        return self.base**t

    def window(self, t: int) -> Tuple[int, int]:
        return math.floor(self.base ** (t - 1)) + 1, math.floor(self.base**t)

    def psi_at(self, t: int) -> Fraction:
        return _exact_or_down(self.psi, self.u(t))

    def rho_at(self, t: int) -> Fraction:
        return _exact_or_down(self.sys.rho, self.u(t))

    def f_of(self, x: Fraction) -> Fraction:
        exact = self.f.eval_small_exact(x)
        return exact if exact is not None else round_down(self.f.eval_small(float(x)))

    def g_at(self, t: int) -> float:
        """g(u_t) evaluated in log space (schedule searches reach scales where
        psi(u_t) underflows a double)."""
        if self._g_elp is None:
            from .funcs import mass_comparison_function

            object.__setattr__(self, "_g_elp", mass_comparison_function(
                self.psi, self.sys.rho, self.f, self.constants.gamma, self.constants.delta))
        g = self._g_elp
        ln_u = t * math.log(float(self.base))
        out = math.log(float(g.coeff)) + float(g.p) * ln_u
        if g.q != 0:
            out += float(g.q) * math.log(ln_u)
        if g.w != 0:
            out += float(g.w) * math.log(math.log(ln_u))
        return math.exp(out) if out < 700 else math.inf

    def check(self, name, ok, detail=""):
        self.checks.append(PlanCheck(name, bool(ok), detail))

    def check_ok(self, name: str) -> bool:
        return all(c.satisfied for c in self.checks if c.name == name)

    def to_dict(self):
        c = self.constants
        return {
            "branch": self.branch,
            "mode": self.mode,
            "eta": float(self.eta),
            "system": self.sys.descriptor(),
            "psi": str(self.psi),
            "f": str(self.f),
            "G_star": self.G_star if math.isfinite(self.G_star) else "inf",
            "base": float(self.base),
            "stride": self.stride,
            "t_schedule": list(self.t_schedule),
            "k1": self.k1,
            "depth": self.depth,
            "constants": {
                "a": str(c.a), "b": str(c.b), "delta": str(c.delta), "gamma": str(c.gamma),
                "kappa": str(c.kappa), "c1": str(c.c1), "c2": str(c.c2), "c3": str(c.c3),
                "c4": str(c.c4), "c5": str(c.c5), "c6": str(c.c6),
                "varpi": str(c.varpi), "lambda_bound": str(c.lambda_bound),
            },
            "checks": [ch.to_dict() for ch in self.checks],
            "caps": dict(self.caps),
        }


def _exact_or_down(h: ExtendedLogPower, u: Fraction) -> Fraction:
    exact = h.eval_exact(u)
    return exact if exact is not None else round_down(h.eval(float(u)))


# ---------------------------------------------------------------------------
# planning
# ---------------------------------------------------------------------------


def plan_construction(
    sys: ResonantSystem,
    psi: ExtendedLogPower,
    f: ExtendedLogPower,
    eta,
    mode: str = MODE_PAPER,
    varpi=None,
    kappa=Fraction(1, 2),
    depth: int = 2,
    within: Optional[Ball] = None,
    caps: Optional[Dict[str, int]] = None,
) -> ConstructionPlan:
    """Derive constants, select the branch, and fix a feasible level schedule.

    Paper mode accepts only schedules satisfying every planning inequality
    and raises with the required first-level scale when the enumeration caps
    forbid one.  Relaxed mode substitutes the supplied varpi/kappa, picks the
    smallest feasible schedule, and records each inequality as satisfied or
    violated so the build and audit check consequences at run time.
    """
    if sys.name != RATIONALS:
        raise DomainError("construction requires the rational point system")
    if not sys.gamma < sys.delta:
        raise DomainError("construction requires common dimension strictly below ambient")
    if mode not in (MODE_PAPER, MODE_RELAXED):
        raise DomainError(f"unknown mode {mode!r}")
    if mode == MODE_PAPER and varpi is not None:
        raise DomainError("varpi can only be overridden in relaxed mode")
    if depth < 1:
        raise DomainError("depth must be at least 1")
    eta = Fraction(eta)
    caps = {**DEFAULT_CAPS, **(caps or {})}
    cons = PlanConstants.derive(sys, kappa, Fraction(str(varpi)) if varpi is not None else None)
    d, g = sys.delta, sys.gamma
    gauge_ok = ((f.p < d) or (f.p == d and f.q > 0) or (f.p == d and f.q == 0 and f.w > 0)) and (
        (f.p > g) or (f.p == g and f.q < 0) or (f.p == g and f.q == 0 and f.w <= 0)
    )
    if not gauge_ok:
        raise DomainError("gauge must lie strictly between the common and ambient dimensions")

    G = limsup_G(psi, sys.rho, f, sys.gamma, sys.delta, sys.seq())
    branch = BRANCH_INFINITE if G.klass is GClass.INFINITE else BRANCH_FINITE

    def make(stride: int) -> ConstructionPlan:
        plan = ConstructionPlan(branch, mode, eta, sys, psi, f, cons, 0.0,
                                Fraction(sys.k) ** stride, stride, [], 0, depth, caps=dict(caps))
        if branch == BRANCH_FINITE:
            _plan_finite(plan, G, within)
        else:
            _plan_infinite(plan, within)
        return plan

    if branch == BRANCH_FINITE:
        # thinning pre-pass: consecutive locating decay should beat lambda_bound
        stride = 1
        decay = float(sys.k) ** float(sys.rho.p)
        while decay**stride >= float(cons.lambda_bound) and stride < 8:
            stride += 1
        plan = make(stride)
        if mode == MODE_RELAXED and stride > 1 and plan.k1 == 0:
            # thinning costs the pruning sub-levels; prefer exercising them
            plan = make(1)
    else:
        plan = make(1)

    if float(plan.base) < 2:
        raise DomainError("effective base must be at least 2 (window values must exhaust the reduced fractions)")
    if mode == MODE_PAPER:
        bad = [c.name for c in plan.checks if not c.satisfied]
        if bad:
            raise InfeasibleError("prescribed-constants plan violates: " + "; ".join(bad))
    return plan


def _r_within(within: Optional[Ball]) -> Fraction:
    return Fraction(1) if within is None else Fraction(within.radius)


def _supply_ok(plan: ConstructionPlan, t: int, r_parent: Fraction, parent_q: float, target: int) -> bool:
    """Can window t supply ~target separated points inside every half-parent?

    Reduced fractions are locally depleted near low-denominator points: the
    nearest neighbours of p/q in F_Q sit at distances j/(q q'), so an
    interval of length r around any parent centre (denominator between 1 and
    parent_q) holds enough points once Q >= 4 (1/r + target * parent_q).
    """
    need = 4.0 * (1.0 / float(r_parent) + float(target) * parent_q)
    return float(plan.base) ** t >= need


def _trim_target(plan: ConstructionPlan, r: Fraction, t: int) -> int:
    d = plan.constants.delta
    val = plan.constants.c3 * (rational_pow(r / plan.rho_at(t), d) or Fraction(str(float(r / plan.rho_at(t)) ** float(d))))
    return math.floor(val)


def _plan_finite(plan: ConstructionPlan, G, within):
    cons, eta = plan.constants, plan.eta
    t_max = plan.caps["t_max"]
    gvals = {t: plan.g_at(t) for t in range(1, t_max + 2)}
    G_star = max(2.0, max(gvals.values()) * (1 + 1e-9), (G.value or 0.0) * (1 + 1e-9))
    plan.G_star = G_star
    if not float(eta) > G_star:
        raise DomainError(f"bounded-g branch needs eta > G* (G* ~ {G_star:.4g})")
    if G.klass is GClass.ZERO and not condense_over_u(G.g, GeometricSequence(plan.base), 0).diverges:
        raise DomainError("bounded-g branch with vanishing g needs a divergent g-sum")

    p3d = float(rational_pow(Fraction(3), cons.delta) or 3.0)
    p3dg = float(rational_pow(Fraction(3), cons.delta - cons.gamma) or 3.0)
    rhs_upper = float(cons.a) / (p3d * 8 * float(cons.c2) * float(cons.b)) * float(eta / cons.varpi)
    rhs_gauge1 = p3dg * float(eta / cons.varpi)

    def lhs_gauge(t):  # f(psi(u_t)) / psi(u_t)^delta
        p = plan.psi.eval(float(plan.u(t)))
        return plan.f.eval_small(p) / p ** float(cons.delta)

    def h_guard_ok(t):
        psi_u, rho_u = plan.psi_at(t), plan.rho_at(t)
        h = _h_value(plan, t, cons.varpi / eta)
        return 3 * psi_u < h < rho_u

    r0 = _r_within(within)
    t1 = guard_fallback = last_feasible = None
    for t in range(1, t_max + 1):
        trim = _trim_target(plan, r0, t)
        feasible = plan.caps["first_level_min"] <= trim <= plan.caps["sublevel_balls"]
        if not feasible:
            continue
        last_feasible = t
        if guard_fallback is None and h_guard_ok(t):
            guard_fallback = t  # smallest level with sound thickening widths
        if gvals[t] < G_star < rhs_upper and lhs_gauge(t) > rhs_gauge1:
            t1 = t
            break
    if t1 is None:
        if plan.mode == MODE_RELAXED and (guard_fallback or last_feasible) is not None:
            t1 = guard_fallback if guard_fallback is not None else last_feasible
        else:
            need = _required_scale(plan, rhs_gauge1)
            raise InfeasibleError(
                f"no first level satisfies the inequalities below the caps; "
                f"the first-level gauge inequality needs u_t1 >= {need:.4g}",
                required=need,
            )
    plan.check("t1.upper-inequality", gvals[t1] < G_star < rhs_upper,
               f"g(u_t1)={gvals[t1]:.4g}, G*={G_star:.4g}, bound={rhs_upper:.4g}")
    plan.check("t1.gauge-inequality", lhs_gauge(t1) > rhs_gauge1,
               f"lhs={lhs_gauge(t1):.4g}, rhs={rhs_gauge1:.4g}")
    plan.check("thinning.lambda-bound",
               float(plan.base) ** float(plan.sys.rho.p) < float(cons.lambda_bound),
               f"consecutive locating decay {float(plan.base) ** float(plan.sys.rho.p):.4g} "
               f"vs bound {float(cons.lambda_bound):.4g}")

    # sub-level count bracket at the first level, capped by enumeration size
    A = p3d * 2 * float(cons.c2) * float(cons.b) / float(cons.a) * float(cons.varpi / eta)
    k1_bracket = _bracket_k(A, lambda i: gvals.get(t1 + i, plan.g_at(t1 + i)))
    k1 = 0
    for i in range(1, k1_bracket + 1):
        if t1 + i > t_max or _trim_target(plan, r0, t1 + i) > plan.caps["sublevel_balls"]:
            break
        k1 = i
    plan.check("k1.bracket-upper", A * sum(gvals.get(t1 + i, 0.0) for i in range(k1)) <= 0.25)
    plan.check("k1.bracket-lower", k1 == k1_bracket,
               "" if k1 == k1_bracket else f"bracket k1={k1_bracket}, capped to {k1}")
    plan.k1 = k1

    schedule = [t1]
    small_t = t1 + k1  # the smallest balls of the previous level
    for n in range(2, plan.depth + 1):
        r_parent = plan.psi_at(small_t)
        parent_q = float(plan.base) ** small_t
        target_cap = plan.caps["block_balls"]
        m_worst = float(cons.a) * float(r_parent) ** float(cons.delta)
        rhs_gauge_n = p3dg / float(cons.varpi) * float(plan.f_of(r_parent)) / m_worst
        lo_t = schedule[-1] + (k1 if n == 2 else 0) + 1
        t_next = None
        for t in range(lo_t, t_max + 1):
            if _trim_target(plan, r_parent, t) < 1:
                continue
            if not _supply_ok(plan, t, r_parent, parent_q, target_cap):
                continue
            if lhs_gauge(t) > rhs_gauge_n and gvals.get(t, plan.g_at(t)) < G_star:
                t_next = t
                break
            if plan.mode == MODE_RELAXED:
                t_next = t
                break
        if t_next is None:
            raise InfeasibleError(f"no feasible level-{n} scale below t_max={t_max}")
        plan.check(f"t{n}.gauge-inequality", lhs_gauge(t_next) > rhs_gauge_n,
                   f"lhs={lhs_gauge(t_next):.4g}, rhs={rhs_gauge_n:.4g}")
        # per-ball sub-level bracket at this level (coefficient carries m(B)/f(r(B)))
        k_n_bracket = _bracket_k(
            A * float(eta) * m_worst / float(plan.f_of(r_parent)),
            lambda i: plan.g_at(t_next + i),
        )
        plan.check(f"k{n}.bracket-lower", k_n_bracket == 0,
                   "" if k_n_bracket == 0 else f"bracket k{n}={k_n_bracket}, capped to 0 (single sub-level)")
        schedule.append(t_next)
        small_t = t_next
    plan.t_schedule = schedule


def _plan_infinite(plan: ConstructionPlan, within):
    cons, eta = plan.constants, plan.eta
    plan.G_star = math.inf
    t_max = plan.caps["t_max"]
    log_c6 = math.log(float(cons.c6))
    r0 = _r_within(within)
    schedule: List[int] = []
    log_prod = 0.0  # log prod_j (rho/psi)^(delta-gamma) (u_{t_j})
    t_min = 1
    for i in range(1, plan.depth + 1):
        need = math.log(float(eta)) + i * log_c6 + log_prod
        r_parent = r0 if i == 1 else plan.psi_at(schedule[-1])
        parent_q = 1.0 if i == 1 else float(plan.base) ** schedule[-1]
        cap = plan.caps["sublevel_balls"] if i == 1 else plan.caps["block_balls"]
        t_pick = None
        for t in range(t_min, t_max + 1):
            trim = _trim_target(plan, r_parent, t)
            low = plan.caps["first_level_min"] if i == 1 else 1
            if trim < low or (i == 1 and trim > cap):
                continue
            if i > 1 and not _supply_ok(plan, t, r_parent, parent_q, cap):
                continue
            ineq = math.log(max(plan.g_at(t), 1e-300)) >= need
            if ineq or plan.mode == MODE_RELAXED:
                t_pick = t
                plan.check(f"product-choice.{i}", ineq,
                           f"g(u_t)={plan.g_at(t):.4g}, required >= exp({need:.4g})")
                break
        if t_pick is None:
            raise InfeasibleError(f"no feasible level-{i} scale for the unbounded-g schedule")
        u = float(plan.u(t_pick))
        log_prod += float(cons.delta - cons.gamma) * math.log(plan.sys.rho.eval(u) / plan.psi.eval(u))
        schedule.append(t_pick)
        t_min = t_pick + 1
    plan.t_schedule = schedule
    plan.k1 = 0


def _bracket_k(A: float, g, hard_cap: int = 1_000_000) -> int:
    """Unique k with A * sum_{i<k} g(i) <= 1/4 < A * sum_{i<=k} g(i) (>= 1 in
    the bounded-g regime; 0 means even the first term overshoots)."""
    s = 0.0
    for k in range(hard_cap):
        s += g(k)
        if A * s > 0.25:
            return k
    return hard_cap


def _required_scale(plan: ConstructionPlan, rhs: float) -> float:
    # leading-exponent solve of f(psi(u)) / psi(u)^delta = rhs
    h_p = float((plan.f.p - plan.constants.delta) * plan.psi.p)
    if h_p <= 0:
        return math.inf
    return rhs ** (1.0 / h_p)


# ---------------------------------------------------------------------------
# the tree
# ---------------------------------------------------------------------------


@dataclass
class SubLevel:
    t: int
    radius: Fraction               # psi(u_t)
    rho: Fraction                  # rho(u_t)
    g_count: int = 0               # selected before pruning
    v_count: int = 0               # surviving after pruning


@dataclass
class Level:
    index: int
    sublevels: List[SubLevel]
    nums: List[int] = field(default_factory=list)
    dens: List[int] = field(default_factory=list)
    subs: List[int] = field(default_factory=list)
    parents: List[int] = field(default_factory=list)
    weights: List[int] = field(default_factory=list)
    h_by_ball: List[Optional[Fraction]] = field(default_factory=list)  # thickening width at this ball's sub-level
    guard_by_sub: List[Optional[bool]] = field(default_factory=list)

    def __len__(self):
        return len(self.nums)

    def center(self, i: int) -> Fraction:
        return Fraction(self.nums[i], self.dens[i])

    def radius(self, i: int) -> Fraction:
        return self.sublevels[self.subs[i]].radius


@dataclass
class CantorTree:
    plan: ConstructionPlan
    levels: List[Level]
    masses: List[List[Fraction]] = field(default_factory=list)
    mass_flags: List[List[bool]] = field(default_factory=list)
    lemma10: Dict[str, bool] = field(default_factory=dict)

    @property
    def total_balls(self) -> int:
        return sum(len(lv) for lv in self.levels)

    def ball(self, level: int, i: int) -> Ball:
        lv = self.levels[level]
        return Ball(lv.center(i), lv.radius(i), "unit_interval")

    def to_jsonl(self, fh):
        for li, lv in enumerate(self.levels):
            for i in range(len(lv)):
                mass = self.masses[li][i] if self.masses else None
                rec = {
                    "level": li + 1,
                    "sublevel": lv.subs[i],
                    "parent_id": lv.parents[i],
                    "center": f"{lv.nums[i]}/{lv.dens[i]}",
                    "radius": f"{lv.radius(i).numerator}/{lv.radius(i).denominator}",
                    "mass_num": None if mass is None else mass.numerator,
                    "mass_den": None if mass is None else mass.denominator,
                }
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# building
# ---------------------------------------------------------------------------


def _pick_centers(Q: int, lo: Fraction, hi: Fraction, spacing: Fraction, count: int) -> Tuple[List[int], List[int]]:
    """Up to ``count`` reduced fractions of denominator <= Q in [lo, hi],
    pairwise farther apart than ``spacing``, spread by stride targets.

    A stride-spread selection with gaps above the separation threshold is a
    sub-collection of a valid disjoint covering selection, which is all the
    counting estimates require.  Arithmetic stays on raw integer pairs.
    """
    nums: List[int] = []
    dens: List[int] = []
    if count <= 0 or hi <= lo:
        return nums, dens
    stride = (hi - lo) / count
    lo_n, lo_d = lo.numerator, lo.denominator
    st_n, st_d = stride.numerator, stride.denominator
    sp_n, sp_d = spacing.numerator, spacing.denominator
    hi_n, hi_d = hi.numerator, hi.denominator
    a = b = None
    for j in range(count):
        tn = lo_n * st_d + j * st_n * lo_d  # target = lo + j*stride over den lo_d*st_d
        td = lo_d * st_d
        if a is not None:
            # strict separation from the previous pick
            mn, md = a * sp_d + sp_n * b, b * sp_d
            if mn * td >= tn * md:
                a2, b2 = farey_gt(mn, md, Q)
            else:
                a2, b2 = farey_geq(Fraction(tn, td), Q)
        else:
            a2, b2 = farey_geq(max(Fraction(tn, td), Fraction(0)), Q)
        if a2 * hi_d > hi_n * b2:
            break
        a, b = a2, b2
        nums.append(a)
        dens.append(b)
    return nums, dens


def _window_weight(plan: ConstructionPlan, q0: int, t: int) -> int:
    lo, hi = plan.window(t)
    m = -(-lo // q0) * q0
    if m > hi:
        raise ConstructionError(f"denominator {q0} has no weight in window {lo}..{hi}")
    return m


def _meets_zones(x: Fraction, reach: Fraction, zones: List[Tuple[Fraction, Fraction]]) -> bool:
    """Does the open ball B(x, reach) meet any sorted open zone?"""
    if not zones:
        return False
    i = bisect.bisect_right(zones, (x, x))
    for j in (i - 1, i):
        if 0 <= j < len(zones):
            zlo, zhi = zones[j]
            if x - reach < zhi and zlo < x + reach:
                return True
    return False


def _h_value(plan: ConstructionPlan, t: int, scale: Fraction) -> Fraction:
    """Thickening width (scale * f(psi(u_t)) / psi(u_t)^gamma)^(1/(delta-gamma))."""
    inner = Fraction(scale) * plan.f_of(plan.psi_at(t))
    if plan.constants.gamma != 0:
        inner /= rational_pow(plan.psi_at(t), plan.constants.gamma) or Fraction(1)
    expo = Fraction(1) / (plan.constants.delta - plan.constants.gamma)
    exact = rational_pow(inner, expo)
    return exact if exact is not None else round_down(float(inner) ** float(expo))


def build_levels(plan: ConstructionPlan, depth: Optional[int] = None, within: Optional[Ball] = None) -> CantorTree:
    """Construct the planned hierarchy.

    Raises ConstructionError when a selection comes up empty, falls below
    half of its counting target, or pruning eats more than half of a
    sub-level (the prescribed constants rule these out; in relaxed mode they
    signal constants that were too aggressive).
    """
    depth = depth or plan.depth
    if depth > len(plan.t_schedule):
        raise DomainError("depth exceeds the planned schedule")
    tree = CantorTree(plan, [])
    total = 0
    for n in range(1, depth + 1):
        if n == 1:
            level = _build_first_level(plan, plan.t_schedule[0], within)
        else:
            level = _build_deeper_level(plan, plan.t_schedule[n - 1], tree.levels[-1], n)
        total += len(level)
        if total > plan.caps["total_balls"]:
            raise InfeasibleError(f"tree exceeded the total ball cap {plan.caps['total_balls']}")
        tree.levels.append(level)
    return tree


def _build_first_level(plan: ConstructionPlan, t1: int, within: Optional[Ball]) -> Level:
    cons = plan.constants
    if within is None:
        lo, hi, r0 = Fraction(0), Fraction(1), Fraction(1)
    else:
        c, r0 = Fraction(within.center), Fraction(within.radius)
        if not 0 <= c <= 1:
            raise DomainError("within-ball must sit in the unit interval")
        lo, hi = max(Fraction(0), c - r0 / 2), min(Fraction(1), c + r0 / 2)
    k1 = plan.k1 if plan.branch == BRANCH_FINITE else 0
    level = Level(1, [])
    zones: List[Tuple[Fraction, Fraction]] = []
    for i in range(k1 + 1):
        t = t1 + i
        Q = plan.window(t)[1]
        rho_u, psi_u = plan.rho_at(t), plan.psi_at(t)
        target = _trim_target(plan, r0, t)
        if target < 1:
            raise ConstructionError(f"empty selection target at level 1 sub-level {i}")
        nums, dens = _pick_centers(Q, lo, hi, 2 * rho_u, target)
        g_count = len(nums)
        if g_count == 0:
            raise ConstructionError("no window points inside the requested ball")
        if 2 * g_count < target:
            raise ConstructionError("selection fell below half the counting target")
        keep = [(a, b) for a, b in zip(nums, dens) if not _meets_zones(Fraction(a, b), rho_u, zones)]
        v_count = len(keep)
        if 2 * v_count < g_count:
            raise ConstructionError(
                f"pruning removed over half of sub-level {i} (kept {v_count} of {g_count}); "
                "relaxed constants too aggressive")
        h = guard = None
        if plan.branch == BRANCH_FINITE:
            h = _h_value(plan, t, cons.varpi / plan.eta)
            guard = 3 * psi_u < h < rho_u
            new_zones = [(Fraction(a, b) - h, Fraction(a, b) + h) for a, b in keep]
            zones = sorted(zones + new_zones)
        level.sublevels.append(SubLevel(t, psi_u, rho_u, g_count, v_count))
        level.guard_by_sub.append(guard)
        for a, b in keep:
            level.nums.append(a)
            level.dens.append(b)
            level.subs.append(i)
            level.parents.append(-1)
            level.weights.append(_window_weight(plan, b, t))
            level.h_by_ball.append(h)
    return level


def _build_deeper_level(plan: ConstructionPlan, t_n: int, parent: Level, n: int) -> Level:
    level = Level(n, [])
    Q = plan.window(t_n)[1]
    rho_u, psi_u = plan.rho_at(t_n), plan.psi_at(t_n)
    level.sublevels.append(SubLevel(t_n, psi_u, rho_u))
    level.guard_by_sub.append(None)  # single sub-level: no pruning, no thickening in play
    g_total = 0
    for pi in range(len(parent)):
        c, r = parent.center(pi), parent.radius(pi)
        lo, hi = max(Fraction(0), c - r / 2), min(Fraction(1), c + r / 2)
        target = min(_trim_target(plan, r, t_n), plan.caps["block_balls"])
        if target < 1:
            raise ConstructionError(f"empty selection target inside a level-{n - 1} ball")
        nums, dens = _pick_centers(Q, lo, hi, 2 * rho_u, target)
        if not nums:
            raise ConstructionError(f"no window points inside a level-{n - 1} ball")
        if 2 * len(nums) < target:
            raise ConstructionError("selection fell below half the counting target")
        g_total += len(nums)
        for a, b in zip(nums, dens):
            level.nums.append(a)
            level.dens.append(b)
            level.subs.append(0)
            level.parents.append(pi)
            level.weights.append(_window_weight(plan, b, t_n))
            level.h_by_ball.append(None)
    level.sublevels[0].g_count = g_total
    level.sublevels[0].v_count = g_total
    return level


# ---------------------------------------------------------------------------
# mass assignment
# ---------------------------------------------------------------------------


def assign_mass(tree: CantorTree) -> CantorTree:
    """Spread a probability mass down the tree per the branch's recursion and
    record the block gauge-sum checks the per-ball mass bound rests on."""
    plan = tree.plan
    tree.masses, tree.mass_flags = [], []
    if plan.branch == BRANCH_FINITE:
        _assign_mass_finite(tree)
    else:
        _assign_mass_infinite(tree)
    return tree


def _assign_mass_finite(tree: CantorTree):
    plan = tree.plan
    first = tree.levels[0]
    fvals = [plan.f_of(first.radius(i)) for i in range(len(first))]
    S1 = sum(fvals, Fraction(0))
    if S1 <= 0:
        raise ConstructionError("vanishing gauge sum at the first level")
    lemma_first = S1 >= plan.eta
    tree.lemma10 = {"first-level": bool(lemma_first)}
    tree.masses.append([fv / S1 for fv in fvals])
    tree.mass_flags.append([lemma_first] * len(first))
    for li in range(1, len(tree.levels)):
        lv, prev = tree.levels[li], tree.levels[li - 1]
        fcache = [plan.f_of(s.radius) for s in lv.sublevels]
        fv = [fcache[lv.subs[i]] for i in range(len(lv))]
        block_sum: Dict[int, Fraction] = {}
        for i in range(len(lv)):
            block_sum[lv.parents[i]] = block_sum.get(lv.parents[i], Fraction(0)) + fv[i]
        pcache = [plan.f_of(s.radius) for s in prev.sublevels]
        block_ok = {
            pi: block_sum[pi] >= pcache[prev.subs[pi]] for pi in block_sum
        }
        tree.lemma10[f"blocks-level-{li + 1}"] = all(block_ok.values())
        masses, flags = [], []
        share: Dict[tuple, Fraction] = {}
        for i in range(len(lv)):
            pi = lv.parents[i]
            key = (pi, lv.subs[i])
            m = share.get(key)
            if m is None:
                m = share[key] = fv[i] / block_sum[pi] * tree.masses[li - 1][pi]
            masses.append(m)
            flags.append(tree.mass_flags[li - 1][pi] and block_ok[pi])
        tree.masses.append(masses)
        tree.mass_flags.append(flags)


def _assign_mass_infinite(tree: CantorTree):
    plan = tree.plan
    first = tree.levels[0]
    n1 = len(first)
    flag1 = plan.check_ok("product-choice.1")
    tree.lemma10 = {"product-choice.1": flag1}
    tree.masses.append([Fraction(1, n1)] * n1)
    tree.mass_flags.append([flag1] * n1)
    for li in range(1, len(tree.levels)):
        lv = tree.levels[li]
        counts: Dict[int, int] = {}
        for i in range(len(lv)):
            counts[lv.parents[i]] = counts.get(lv.parents[i], 0) + 1
        flag = plan.check_ok(f"product-choice.{li + 1}")
        tree.lemma10[f"product-choice.{li + 1}"] = flag
        masses, flags = [], []
        for i in range(len(lv)):
            pi = lv.parents[i]
            masses.append(tree.masses[li - 1][pi] / counts[pi])
            flags.append(tree.mass_flags[li - 1][pi] and flag)
        tree.masses.append(masses)
        tree.mass_flags.append(flags)


# ---------------------------------------------------------------------------
# structural verification and the mass audit
# ---------------------------------------------------------------------------


def verify_tree(tree: CantorTree) -> Dict[str, bool]:
    """Exact structural checks: nesting, within-level disjointness, window
    membership, thickening guards, and mass conservation."""
    out: Dict[str, bool] = {}
    out["nesting"] = _check_nesting(tree)
    out["disjoint"] = all(_check_disjoint_level(lv) for lv in tree.levels)
    out["membership"] = _check_membership(tree)
    guards = [g for lv in tree.levels for g in lv.guard_by_sub if g is not None]
    out["thickening_guard"] = all(guards) if guards else True
    if tree.masses:
        out["mass_conservation"] = _check_mass(tree)
    return out


def _check_nesting(tree: CantorTree) -> bool:
    for li in range(1, len(tree.levels)):
        lv, prev = tree.levels[li], tree.levels[li - 1]
        margins = {}
        for sc, schild in enumerate(lv.sublevels):
            for sp, sparent in enumerate(prev.sublevels):
                m = sparent.radius - schild.radius
                margins[(sp, sc)] = (m.numerator, m.denominator)
        for i in range(len(lv)):
            pi = lv.parents[i]
            mn, md = margins[(prev.subs[pi], lv.subs[i])]
            if mn < 0:
                return False
            # |c - c_p| <= margin, exact integer arithmetic
            n1, d1 = lv.nums[i], lv.dens[i]
            n2, d2 = prev.nums[pi], prev.dens[pi]
            if abs(n1 * d2 - n2 * d1) * md > mn * d1 * d2:
                return False
    return True


def _check_disjoint_level(lv: Level) -> bool:
    if len(lv) < 2:
        return True
    scale = 1 << 80
    order = sorted(range(len(lv)), key=lambda i: (lv.nums[i] * scale) // lv.dens[i])
    sums = {}
    for sa, a_sub in enumerate(lv.sublevels):
        for sb, b_sub in enumerate(lv.sublevels):
            s = a_sub.radius + b_sub.radius
            sums[(sa, sb)] = (s.numerator, s.denominator)
    for a, b in zip(order, order[1:]):
        rn, rd = sums[(lv.subs[a], lv.subs[b])]
        na, da = lv.nums[a], lv.dens[a]
        nb, db = lv.nums[b], lv.dens[b]
        if abs(nb * da - na * db) * rd < rn * da * db:
            return False
    return True


def _check_membership(tree: CantorTree) -> bool:
    for lv in tree.levels:
        for i in range(len(lv)):
            sub = lv.sublevels[lv.subs[i]]
            lo, hi = tree.plan.window(sub.t)
            w, d = lv.weights[i], lv.dens[i]
            if not (lo <= w <= hi and w % d == 0 and gcd(lv.nums[i], d) == 1 and d <= hi):
                return False
    return True


def _check_mass(tree: CantorTree) -> bool:
    if sum(tree.masses[0], Fraction(0)) != 1:
        return False
    for li in range(1, len(tree.levels)):
        sums: Dict[int, Fraction] = {}
        for i, m in enumerate(tree.masses[li]):
            pi = tree.levels[li].parents[i]
            sums[pi] = sums.get(pi, Fraction(0)) + m
        for pi, s in sums.items():
            if s != tree.masses[li - 1][pi]:
                return False
        # parents with no children would leak mass out of the tree
        if set(sums) != set(range(len(tree.levels[li - 1]))):
            return False
    return True


@dataclass
class AuditReport:
    eta: float
    construction_max_ratio: float
    flagged_max_ratio: Optional[float]
    flagged_bound_ok: Optional[bool]
    lemma10: Dict[str, bool]
    arbitrary_max_ratio: float
    arbitrary_samples: int
    mdp_bound: float
    structure: Dict[str, bool]

    def to_dict(self):
        return {
            "eta": self.eta,
            "construction_max_ratio": self.construction_max_ratio,
            "flagged_max_ratio": self.flagged_max_ratio,
            "flagged_bound_ok": self.flagged_bound_ok,
            "lemma10": dict(self.lemma10),
            "arbitrary_max_ratio": self.arbitrary_max_ratio,
            "arbitrary_samples": self.arbitrary_samples,
            "mdp_bound": self.mdp_bound,
            "structure": dict(self.structure),
        }


def audit_mass(tree: CantorTree, samples: int = 1000, seed: int = 0) -> AuditReport:
    """Mass audit: per-ball ratios mu(B) * eta / f(r(B)), the implied constant
    over random balls, and the mass-distribution lower bound they certify.

    The per-ball bound <= 1 is asserted exactly for every ball whose block
    checks held along its ancestry; elsewhere the worst ratio is reported.
    """
    plan = tree.plan
    if not tree.masses:
        assign_mass(tree)
    eta = plan.eta
    max_ratio = 0.0
    flagged_max: Optional[float] = None
    flagged_ok = True
    any_flagged = False
    for li, lv in enumerate(tree.levels):
        fcache = [plan.f_of(s.radius) for s in lv.sublevels]
        ratio_memo: Dict[tuple, Fraction] = {}
        for i in range(len(lv)):
            key = (id(tree.masses[li][i]), lv.subs[i])
            ratio_exact = ratio_memo.get(key)
            if ratio_exact is None:
                ratio_exact = ratio_memo[key] = tree.masses[li][i] * eta / fcache[lv.subs[i]]
            ratio = float(ratio_exact)
            max_ratio = max(max_ratio, ratio)
            if tree.mass_flags[li][i]:
                any_flagged = True
                flagged_max = ratio if flagged_max is None else max(flagged_max, ratio)
                if ratio_exact > 1:
                    flagged_ok = False
    if not any_flagged:
        flagged_ok = None

    # random balls at mixed radii anchored to the construction scales; the
    # covering estimate mu(A) <= sum of masses of intersecting balls is taken
    # at the level giving the smallest value
    rng = np.random.Generator(np.random.Philox(key=seed))
    per_level = []
    for li, lv in enumerate(tree.levels):
        order = sorted(range(len(lv)), key=lambda i: (lv.nums[i] << 60) // lv.dens[i])
        cf = np.array([lv.nums[i] / lv.dens[i] for i in order])
        cm = np.array([float(tree.masses[li][i]) for i in order], dtype=np.float64)
        rmax = float(max(s.radius for s in lv.sublevels))
        per_level.append((cf, np.concatenate([[0.0], np.cumsum(cm)]), rmax))
    scales = sorted({float(s.radius) for lv in tree.levels for s in lv.sublevels})
    leaves = tree.levels[-1]
    arb_max = 0.0
    mdp_samples = []
    for _ in range(samples):
        # a ball meeting the deepest level: centre jittered around a leaf
        j = int(rng.integers(0, len(leaves)))
        anchor = scales[int(rng.integers(0, len(scales)))]
        r = anchor * math.exp(float(rng.uniform(0.0, math.log(100.0))))
        if r >= 1.0 / plan.f.r_min:
            continue
        c = leaves.nums[j] / leaves.dens[j] + float(rng.uniform(-0.9, 0.9)) * r
        mu = math.inf
        for cf, cmsum, rmax in per_level:
            i0 = int(np.searchsorted(cf, c - r - rmax - 1e-12))
            i1 = int(np.searchsorted(cf, c + r + rmax + 1e-12))
            mu = min(mu, float(cmsum[i1] - cmsum[i0]))
        if mu == 0.0 or not math.isfinite(mu):
            continue
        ratio = mu * float(eta) / plan.f.eval_small(r)
        arb_max = max(arb_max, ratio)
        mdp_samples.append((Ball(Fraction(str(c)), Fraction(str(r)), "unit_interval"), mu))
    from .geometry import mdp_lower_bound

    mdp = mdp_lower_bound(mdp_samples, plan.f, 1.0) if mdp_samples else 0.0
    return AuditReport(
        float(eta), max_ratio, flagged_max, flagged_ok, dict(tree.lemma10),
        arb_max, samples, mdp, verify_tree(tree),
    )
