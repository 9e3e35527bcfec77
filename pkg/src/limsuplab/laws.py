"""The verdict engine: ambient-measure and generalized-measure conclusions.

Given a resonant system, an approximating function psi and optionally a
gauge f, the engine classifies

* the ambient measure of the limsup set (zero / positive / full / unknown),
* its generalized Hausdorff f-measure (zero / infinite / not applicable /
  unknown), and
* the critical exponent d together with the measure verdict at d,

purely from exact exponent arithmetic on the log-power family.  Every
non-unknown verdict carries a trace listing each hypothesis of the rule that
produced it, with a stable tag from the registry below; unknown verdicts
name the first hypothesis that failed or could not be decided.

Tag registry (see README for the full table):

  cover.sum             convergence class of the natural cover sum
  dichotomy.limsup-ratio    limsup psi(u_n)/rho(u_n) > 0
  dichotomy.ratio-sum   divergence of sum (psi/rho)^(delta-gamma)(u_n)
  dichotomy.regularity  psi or rho decays geometrically along u
  dichotomy.gamma-eq-delta  resonant sets fill the ambient dimension
  ubiquity.local / ubiquity.global   locating evidence carried by the system
  gauge.shape           gauge lies strictly between the dimensions
  gauge.growth          scaled-gauge growth condition (gauge route at G = 0)
  zero-infinity.G       limit class of the mass-comparison function
  zero-infinity.g-sum   divergence of sum g(u_n)
  circle.squeeze        r^2 psi(r) -> 0 guard for the circle system
  psi.decreasing        approximating function eventually decreasing
  dimension.sigma       exponent-ratio formula for the critical exponent
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Tuple

from .errors import DomainError
from .funcs import (
    ExtendedLogPower,
    GClass,
    GeometricSequence,
    SeriesVerdict,
    classify_series,
    compose_f_psi,
    condense_over_u,
    is_u_regular,
    limsup_G,
    mass_comparison_function,
)
from .systems import (
    CIRCLE,
    UBIQUITY_CLAIMED,
    UBIQUITY_NONE,
    UBIQUITY_VERIFIED,
    ResonantSystem,
    natural_cover_term,
)


class Lebesgue(str, Enum):
    ZERO = "zero"
    POSITIVE = "positive"
    FULL = "full"
    UNKNOWN = "unknown"


class Hausdorff(str, Enum):
    ZERO = "zero"
    INFINITE = "infinite"
    NOT_APPLICABLE = "not-applicable"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class TraceEntry:
    hypothesis: str
    status: str  # satisfied | failed | undecided | claimed | verified
    tag: str
    detail: str = ""

    def to_dict(self):
        return {"hypothesis": self.hypothesis, "status": self.status, "tag": self.tag, "detail": self.detail}


@dataclass
class Verdict:
    system: str
    psi: str
    f: Optional[str] = None
    lebesgue: Lebesgue = Lebesgue.UNKNOWN
    hausdorff: Hausdorff = Hausdorff.UNKNOWN
    dimension: Optional[Fraction] = None
    sigma: Optional[Fraction] = None
    trace: List[TraceEntry] = field(default_factory=list)
    guards: List[str] = field(default_factory=list)

    def add(self, hypothesis, status, tag, detail=""):
        self.trace.append(TraceEntry(hypothesis, status, tag, detail))

    def to_dict(self):
        return {
            "system": self.system,
            "psi": self.psi,
            "f": self.f,
            "lebesgue": self.lebesgue.value,
            "hausdorff": self.hausdorff.value,
            "dimension": None if self.dimension is None else _num(self.dimension),
            "sigma": None if self.sigma is None else _num(self.sigma),
            "trace": [t.to_dict() for t in self.trace],
            "guards": list(self.guards),
        }


def _num(x: Fraction):
    return {"fraction": f"{x.numerator}/{x.denominator}", "value": float(x)}


# ---------------------------------------------------------------------------
# shared hypothesis checks
# ---------------------------------------------------------------------------


def _circle_guard(sys: ResonantSystem, psi: ExtendedLogPower, v: Verdict) -> bool:
    """Circle verdicts need r^2 psi(r) -> 0, which pins the approximated
    points to the circle itself."""
    if sys.name != CIRCLE:
        return True
    squeezed = psi.times(ExtendedLogPower(1, 2)).tends_to_zero()
    if squeezed:
        v.add("r^2 psi(r) -> 0", "satisfied", "circle.squeeze")
        return True
    v.add("r^2 psi(r) -> 0", "failed", "circle.squeeze")
    v.guards.append("circle system requires r^2 psi(r) -> 0; verdict withheld")
    return False


def _psi_decreasing(psi: ExtendedLogPower, v: Verdict) -> bool:
    if psi.eventually_decreasing():
        v.add("psi eventually decreasing", "satisfied", "psi.decreasing")
        return True
    v.add("psi eventually decreasing", "failed", "psi.decreasing")
    return False


def _ubiquity_entry(sys: ResonantSystem, v: Verdict, need_local: bool) -> Optional[str]:
    """Returns 'local', 'global' or None according to the system's evidence flag."""
    if sys.ubiquity == UBIQUITY_CLAIMED:
        v.add("locating neighbourhoods capture every ball", "claimed", "ubiquity.local")
        return "local"
    if sys.ubiquity == UBIQUITY_VERIFIED:
        v.add("locating neighbourhoods capture the space", "verified", "ubiquity.global")
        return None if need_local else "global"
    v.add("locating evidence", "failed", "ubiquity.local" if need_local else "ubiquity.global")
    return None


def ambient_cover_sum(sys: ResonantSystem, psi: ExtendedLogPower) -> SeriesVerdict:
    """Class of sum_n (#window_n) * psi(u_n)^(delta - gamma): the ambient-measure
    cost of covering by the level-n neighbourhoods."""
    term = natural_cover_term(sys).times(psi.power(sys.delta - sys.gamma))
    return condense_over_u(term, sys.seq(), 0)


def natural_cover_sum(sys: ResonantSystem, psi: ExtendedLogPower, f: ExtendedLogPower) -> SeriesVerdict:
    """Class of sum_n (#window_n) * psi(u_n)^(-gamma) * f(psi(u_n))."""
    if f.p == sys.delta and f.q == 0 and f.w == 0:
        return ambient_cover_sum(sys, psi)  # gauge comparable to ambient measure
    fpsi = psi.scaled(f.coeff) if (f.p, f.q, f.w) == (1, 0, 0) else compose_f_psi(f, psi)
    term = natural_cover_term(sys).times(psi.power(-sys.gamma)).times(fpsi)
    return condense_over_u(term, sys.seq(), 0)


# ---------------------------------------------------------------------------
# ambient measure dichotomy
# ---------------------------------------------------------------------------


def lebesgue_verdict(sys: ResonantSystem, psi: ExtendedLogPower) -> Verdict:
    v = Verdict(sys.name, str(psi))
    if not _circle_guard(sys, psi, v):
        return v
    if not _psi_decreasing(psi, v):
        return v

    cover = ambient_cover_sum(sys, psi)
    if cover.converges:
        v.add("ambient cover sum converges", "satisfied", "cover.sum", "first Borel-Cantelli half")
        v.lebesgue = Lebesgue.ZERO
        return v
    v.add("ambient cover sum diverges", "satisfied", "cover.sum")

    if sys.gamma == sys.delta:
        v.add("common dimension equals ambient dimension", "satisfied", "dichotomy.gamma-eq-delta")
        return _finish_positive_side(sys, v)

    # large-ratio branch: limsup psi(u_n)/rho(u_n) > 0
    ratio = psi.times(sys.rho.power(-1))
    if not ratio.tends_to_zero():
        v.add("limsup psi(u_n)/rho(u_n) > 0", "satisfied", "dichotomy.limsup-ratio")
        return _finish_positive_side(sys, v)

    dsum = condense_over_u(ratio.power(sys.delta - sys.gamma), sys.seq(), 0)
    if not dsum.diverges:
        v.add("sum (psi/rho)^(delta-gamma)(u_n) diverges", "failed", "dichotomy.ratio-sum")
        return v
    v.add("sum (psi/rho)^(delta-gamma)(u_n) diverges", "satisfied", "dichotomy.ratio-sum")

    u = sys.seq()
    reg_psi = is_u_regular(psi, u)
    reg_rho = is_u_regular(sys.rho, u)
    if not (reg_psi.regular or reg_rho.regular):
        v.add("psi or rho geometrically decaying along u", "failed", "dichotomy.regularity")
        return v
    which = "psi" if reg_psi.regular else "rho"
    lam = reg_psi.lam if reg_psi.regular else reg_rho.lam
    v.add("psi or rho geometrically decaying along u", "satisfied", "dichotomy.regularity", f"{which}, lambda={lam:.6g}")
    return _finish_positive_side(sys, v)


def _finish_positive_side(sys: ResonantSystem, v: Verdict) -> Verdict:
    level = _ubiquity_entry(sys, v, need_local=False)
    if level == "local":
        v.lebesgue = Lebesgue.FULL
    elif level == "global":
        v.lebesgue = Lebesgue.POSITIVE
    return v


# ---------------------------------------------------------------------------
# generalized-measure zero-infinity law
# ---------------------------------------------------------------------------


def _gauge_shape_ok(sys: ResonantSystem, f: ExtendedLogPower, v: Verdict) -> Optional[bool]:
    """Gauge hypotheses: x^-delta f(x) -> infinity and decreasing,
    x^-gamma f(x) increasing (as x -> 0).  Returns None when the gauge is
    comparable to the ambient dimension (route to the ambient dichotomy)."""
    d, g = sys.delta, sys.gamma
    above = (f.p < d) or (f.p == d and f.q > 0) or (f.p == d and f.q == 0 and f.w > 0)
    if not above:
        v.add("x^-delta f(x) -> infinity as x -> 0", "failed", "gauge.shape",
              "gauge comparable to or below ambient dimension")
        return None
    below = (f.p > g) or (f.p == g and f.q < 0) or (f.p == g and f.q == 0 and f.w <= 0)
    if not below:
        v.add("x^-gamma f(x) increasing", "failed", "gauge.shape")
        return False
    v.add("gauge strictly between common and ambient dimension", "satisfied", "gauge.shape")
    return True


def hausdorff_verdict(sys: ResonantSystem, psi: ExtendedLogPower, f: ExtendedLogPower) -> Verdict:
    v = Verdict(sys.name, str(psi), str(f))
    if not _circle_guard(sys, psi, v):
        return v
    if not _psi_decreasing(psi, v):
        return v
    if sys.gamma == sys.delta:
        v.add("common dimension equals ambient dimension", "failed", "dichotomy.gamma-eq-delta",
              "gauge hypotheses exclude this case; ambient dichotomy applies")
        v.hausdorff = Hausdorff.NOT_APPLICABLE
        v.guards.append("gamma = delta: use the ambient-measure dichotomy")
        return v
    shape = _gauge_shape_ok(sys, f, v)
    if shape is None:
        v.hausdorff = Hausdorff.NOT_APPLICABLE
        v.guards.append("gauge comparable to ambient dimension: use the ambient-measure dichotomy")
        return v
    if shape is False:
        return v
    if f.p == 0:
        v.add("gauge composable with psi", "undecided", "gauge.shape",
              "zero leading exponent leaves the log-power family under composition")
        return v

    cover = natural_cover_sum(sys, psi, f)
    if cover.converges:
        v.add("gauge cover sum converges", "satisfied", "cover.sum", "first Borel-Cantelli half")
        v.hausdorff = Hausdorff.ZERO
        return v
    v.add("gauge cover sum diverges", "satisfied", "cover.sum")

    u = sys.seq()
    G = limsup_G(psi, sys.rho, f, sys.gamma, sys.delta, u)
    if G.klass in (GClass.FINITE_POSITIVE, GClass.INFINITE):
        v.add("limit class of g(u_n) positive", "satisfied", "zero-infinity.G",
              f"G {G.klass.value}" + (f" = {G.value:.6g}" if G.value else ""))
        if _ubiquity_entry(sys, v, need_local=True) == "local":
            v.hausdorff = Hausdorff.INFINITE
        return v
    v.add("limit class of g(u_n)", "satisfied", "zero-infinity.G", "G = 0")

    gsum = condense_over_u(G.g, u, 0)
    if not gsum.diverges:
        v.add("sum g(u_n) diverges", "failed", "zero-infinity.g-sum")
        return v
    v.add("sum g(u_n) diverges", "satisfied", "zero-infinity.g-sum")

    reg_rho = is_u_regular(sys.rho, u)
    if reg_rho.regular:
        v.add("rho geometrically decaying along u", "satisfied", "dichotomy.regularity",
              f"lambda={reg_rho.lam:.6g}")
    else:
        reg_psi = is_u_regular(psi, u)
        growth = f.p > sys.gamma  # scaled-gauge growth condition, exact for this family
        if not (reg_psi.regular and growth):
            v.add("rho (or psi with the gauge growth condition) geometrically decaying",
                  "failed", "dichotomy.regularity")
            return v
        v.add("psi geometrically decaying and gauge growth condition", "satisfied", "gauge.growth",
              f"lambda={reg_psi.lam:.6g}")
    if _ubiquity_entry(sys, v, need_local=True) == "local":
        v.hausdorff = Hausdorff.INFINITE
    return v


# ---------------------------------------------------------------------------
# critical exponent
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DimensionResult:
    sigma: Fraction
    dimension: Fraction
    hausdorff_at_d: str  # "infinite" | "unknown"
    verdict: Verdict


def critical_dimension(sys: ResonantSystem, psi: ExtendedLogPower) -> DimensionResult:
    """sigma as the exact ratio of leading exponents, d = gamma + sigma (delta
    - gamma), and the measure flag at the critical gauge x^d.

    Log factors of psi and rho drop out of sigma in the limit.  The flag is
    'infinite' when the mass-comparison function at exponent d has positive
    limit class, or vanishes but with divergent sum and a geometrically
    decaying side.
    """
    v = Verdict(sys.name, str(psi))
    if psi.p == 0:
        raise DomainError("sigma undefined for psi with zero leading exponent")
    if psi.p > 0 or not psi.eventually_decreasing():
        raise DomainError("psi must be decreasing with negative leading exponent")
    _circle_guard(sys, psi, v)

    sigma = Fraction(sys.rho.p) / Fraction(psi.p)
    v.add("sigma = ratio of leading exponents", "satisfied", "dimension.sigma",
          f"sigma={sigma}")
    ratio = psi.times(sys.rho.power(-1))
    if not ratio.tends_to_zero():
        # approximation never finer than the locating scale: full ambient dimension
        d = sys.delta
        v.sigma, v.dimension = sigma, d
        v.add("psi(u_n)/rho(u_n) bounded away from 0", "satisfied", "dichotomy.limsup-ratio",
              "positive ambient measure forces the ambient dimension")
        return DimensionResult(sigma, d, "unknown", v)
    d = sys.gamma + sigma * (sys.delta - sys.gamma)
    v.sigma, v.dimension = sigma, d

    flag = "unknown"
    if sys.gamma < d < sys.delta and v.guards == []:
        g = mass_comparison_function(psi, sys.rho, ExtendedLogPower(1, d), sys.gamma, sys.delta)
        if not g.tends_to_zero():
            flag = "infinite"
            v.add("limit class of g(u_n) positive at the critical gauge", "satisfied", "zero-infinity.G")
        else:
            gsum = condense_over_u(g, sys.seq(), 0)
            if gsum.diverges and (is_u_regular(sys.rho, sys.seq()).regular or is_u_regular(psi, sys.seq()).regular):
                flag = "infinite"
                v.add("sum g(u_n) diverges with geometric decay at the critical gauge",
                      "satisfied", "zero-infinity.g-sum")
            else:
                v.add("critical-gauge sum converges: measure at d undecided",
                      "undecided", "zero-infinity.g-sum")
        if flag == "infinite" and _ubiquity_entry(sys, v, need_local=True) != "local":
            flag = "unknown"
    return DimensionResult(sigma, d, flag, v)


def classify(sys: ResonantSystem, psi: ExtendedLogPower, f: Optional[ExtendedLogPower] = None) -> Verdict:
    """Combined verdict: ambient dichotomy always, gauge law when f is given,
    critical exponent whenever psi has a negative leading exponent."""
    v = lebesgue_verdict(sys, psi)
    if f is not None:
        hv = hausdorff_verdict(sys, psi, f)
        v.f = hv.f
        v.hausdorff = hv.hausdorff
        v.trace.extend(hv.trace)
        v.guards.extend(g for g in hv.guards if g not in v.guards)
    if psi.p < 0:
        try:
            dim = critical_dimension(sys, psi)
            v.sigma, v.dimension = dim.sigma, dim.dimension
        except DomainError:
            pass
    return v
