"""Algebra of log-power comparison functions and their series.

Everything the verdict engine decides reduces to statements about functions
of the form

    h(t) = c * t^p * (ln t)^q * (ln ln t)^w        (c > 0, rational p, q, w)

evaluated either at a large variable (approximating functions psi, locating
functions rho, series terms) or at a small one (gauge functions for the
generalized Hausdorff measure, written f(x) = c * x^p * (ln 1/x)^q *
(ln ln 1/x)^w).  The family is closed under products, rational powers and,
up to a bounded factor, under composing a gauge with a decreasing member,
and the convergence class of sum_{t>=2} h(t) is decided exactly by the
exponent triple.  That exactness is what the rest of the package leans on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import DomainError, ParseError

Rat = Union[int, Fraction]

#: below e^e the iterated logarithm changes sign; 16 > e^e keeps all three
#: factors positive.
MIN_RMIN = 16.0


def _frac(x) -> Fraction:
    """Convert ints, Fractions, decimal strings and floats to Fraction.

    Floats are converted through their shortest repr so that 0.2 means 1/5,
    not the binary approximation of it.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x)) if math.isfinite(x) else Fraction(0)
    return Fraction(x)


def rational_pow(base: Fraction, exp: Fraction) -> Optional[Fraction]:
    """base**exp as an exact Fraction, or None when the result is irrational.

    Works by extracting exact integer roots of numerator and denominator.
    """
    base = Fraction(base)
    exp = Fraction(exp)
    if base <= 0:
        return None
    if exp == 0:
        return Fraction(1)
    if exp < 0:
        inv = rational_pow(base, -exp)
        return None if inv is None or inv == 0 else 1 / inv
    num, den = base.numerator, base.denominator
    root = exp.denominator
    if root > 1:
        rn = _iroot(num, root)
        rd = _iroot(den, root)
        if rn is None or rd is None:
            return None
        num, den = rn, rd
    k = exp.numerator
    return Fraction(num**k, den**k)


def _iroot(n: int, k: int) -> Optional[int]:
    if n == 0:
        return 0
    r = round(n ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


@dataclass(frozen=True)
class ExtendedLogPower:
    """c * v^p * (ln v)^q * (ln ln v)^w on v >= r_min (> e^e).

    For gauge (dimension-function) shapes the same triple is read at a small
    argument x = 1/v, i.e. value c * x^p * (ln 1/x)^q * (ln ln 1/x)^w; use
    :meth:`eval_small` there.  ``asymptotic`` marks members produced by
    composition, which represent their target only up to a bounded positive
    factor (enough for every convergence classification made here).
    """

    coeff: Fraction
    p: Fraction = Fraction(0)
    q: Fraction = Fraction(0)
    w: Fraction = Fraction(0)
    r_min: float = MIN_RMIN
    asymptotic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coeff", _frac(self.coeff))
        object.__setattr__(self, "p", _frac(self.p))
        object.__setattr__(self, "q", _frac(self.q))
        object.__setattr__(self, "w", _frac(self.w))
        object.__setattr__(self, "r_min", max(float(self.r_min), MIN_RMIN))
        if self.coeff <= 0:
            raise DomainError("coefficient must be positive")

    # -- evaluation ------------------------------------------------------

    def eval(self, r: float) -> float:
        """Value at a large argument; factors that are absent do not constrain
        the domain (a pure power evaluates anywhere above 0)."""
        r = float(r)
        if r <= 0 or (self.q != 0 and r <= 1.0) or (self.w != 0 and r < self.r_min):
            raise DomainError(f"eval at r={r} outside the domain (r_min={self.r_min})")
        out = float(self.coeff) * r ** float(self.p)
        if self.q != 0 or self.w != 0:
            lr = math.log(r)
            if self.q != 0:
                out *= lr ** float(self.q)
            if self.w != 0:
                out *= math.log(lr) ** float(self.w)
        return out

    def eval_small(self, x: float) -> float:
        """Gauge-shape value at a small argument (mirror of :meth:`eval`)."""
        x = float(x)
        if x <= 0 or (self.q != 0 and x >= 1.0) or (self.w != 0 and x > 1.0 / self.r_min):
            raise DomainError(f"eval_small at x={x} outside the domain")
        out = float(self.coeff) * x ** float(self.p)
        if self.q != 0 or self.w != 0:
            l1x = math.log(1.0 / x)
            if self.q != 0:
                out *= l1x ** float(self.q)
            if self.w != 0:
                out *= math.log(l1x) ** float(self.w)
        return out

    def eval_exact(self, r: Rat) -> Optional[Fraction]:
        """Exact rational value at rational r, when one exists (q = w = 0)."""
        if self.q != 0 or self.w != 0:
            return None
        rp = rational_pow(_frac(r), self.p)
        return None if rp is None else self.coeff * rp

    def eval_small_exact(self, x: Rat) -> Optional[Fraction]:
        if self.q != 0 or self.w != 0:
            return None
        xp = rational_pow(_frac(x), self.p)
        return None if xp is None else self.coeff * xp

    # -- algebra ---------------------------------------------------------

    def times(self, other: "ExtendedLogPower") -> "ExtendedLogPower":
        return ExtendedLogPower(
            self.coeff * other.coeff,
            self.p + other.p,
            self.q + other.q,
            self.w + other.w,
            max(self.r_min, other.r_min),
            self.asymptotic or other.asymptotic,
        )

    def power(self, s: Rat) -> "ExtendedLogPower":
        s = _frac(s)
        c = rational_pow(self.coeff, s)
        if c is None:
            c = _frac(float(self.coeff) ** float(s))
        return ExtendedLogPower(c, self.p * s, self.q * s, self.w * s, self.r_min, self.asymptotic)

    def scaled(self, c: Rat) -> "ExtendedLogPower":
        return replace(self, coeff=self.coeff * _frac(c))

    @property
    def triple(self):
        return (self.p, self.q, self.w)

    # -- qualitative behaviour at infinity -------------------------------

    def _lex_sign(self) -> int:
        for e in (self.p, self.q, self.w):
            if e != 0:
                return 1 if e > 0 else -1
        return 0

    def tends_to_zero(self) -> bool:
        return self._lex_sign() < 0

    def tends_to_infinity(self) -> bool:
        return self._lex_sign() > 0

    def is_constant(self) -> bool:
        return self._lex_sign() == 0

    def eventually_decreasing(self) -> bool:
        return self.tends_to_zero()

    def monotone_from(self) -> float:
        """Radius past which an eventually-decreasing member strictly decreases.

        The log-derivative is p/r + q/(r ln r) + w/(r ln r ln ln r); the bound
        below makes the p (resp. q) term dominate.
        """
        if not self.eventually_decreasing():
            raise DomainError("function is not eventually decreasing")
        aq, aw = abs(float(self.q)), abs(float(self.w))
        if self.p < 0:
            need_lr = 2.0 * (aq + aw + 1.0) / abs(float(self.p))
            return max(self.r_min, math.exp(min(need_lr, 700.0)))
        # p == 0, q < 0: need ln ln r > 2(|w|+1)/|q|
        need_llr = 2.0 * (aw + 1.0) / abs(float(self.q))
        return max(self.r_min, math.exp(math.exp(min(need_llr, 6.0))))

    def __str__(self):
        return format_literal(self)


# ---------------------------------------------------------------------------
# literal grammar:  c * r^p * logr^q * loglogr^w   (x synonyms accepted)
# ---------------------------------------------------------------------------

_BASE_SLOT = {"r": "p", "x": "p", "logr": "q", "logx": "q", "loglogr": "w", "loglogx": "w"}


def parse_literal(text: str, r_min: float = MIN_RMIN) -> ExtendedLogPower:
    """Parse ``c * r^p * logr^q * loglogr^w`` with rational exponents.

    Exponents may be integers, decimals or a/b fractions; factors may appear
    in any order, each at most once; a bare numeric factor is the coefficient.
    """
    coeff = Fraction(1)
    seen_coeff = False
    slots = {"p": None, "q": None, "w": None}
    for raw in text.split("*"):
        tok = raw.strip()
        if not tok:
            raise ParseError(f"empty factor in literal {text!r}")
        name, caret, exp = tok.partition("^")
        name = name.strip().lower()
        if caret and not exp.strip():
            raise ParseError(f"dangling exponent in factor {tok!r} of {text!r}")
        if name in _BASE_SLOT:
            slot = _BASE_SLOT[name]
            if slots[slot] is not None:
                raise ParseError(f"duplicate {name} factor in {text!r}")
            try:
                slots[slot] = _parse_rat(exp.strip()) if caret else Fraction(1)
            except ValueError as e:
                raise ParseError(f"bad exponent in factor {tok!r} of {text!r}") from e
        else:
            if exp:
                raise ParseError(f"cannot raise a number to a power in {text!r}")
            if seen_coeff:
                raise ParseError(f"two coefficients in {text!r}")
            try:
                coeff = _parse_rat(tok)
            except ValueError as e:
                raise ParseError(f"bad factor {tok!r} in {text!r}") from e
            seen_coeff = True
    return ExtendedLogPower(
        coeff,
        slots["p"] or Fraction(0),
        slots["q"] or Fraction(0),
        slots["w"] or Fraction(0),
        r_min,
    )


def _parse_rat(s: str) -> Fraction:
    if not s:
        raise ValueError("empty number")
    return Fraction(s)


def _fmt_rat(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_literal(h: ExtendedLogPower) -> str:
    parts = [_fmt_rat(h.coeff)]
    for name, e in (("r", h.p), ("logr", h.q), ("loglogr", h.w)):
        if e != 0:
            parts.append(f"{name}^{_fmt_rat(e)}")
    return " * ".join(parts)


# ---------------------------------------------------------------------------
# geometric index sequences u_n = k^n, l_n = k^(n-1)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeometricSequence:
    """u_n = k^n with the matching lower cut l_n = u_{n-1}."""

    k: Fraction
    n_max: int = 64

    def __post_init__(self):
        object.__setattr__(self, "k", _frac(self.k))
        if self.k <= 1:
            raise DomainError("sequence base must exceed 1")
        if self.n_max < 1:
            raise DomainError("n_max must be positive")

    def u(self, n: int) -> Fraction:
        return self.k**n

    def l(self, n: int) -> Fraction:
        return self.k ** (n - 1)


# ---------------------------------------------------------------------------
# series classification
# ---------------------------------------------------------------------------


class SeriesClass(str, Enum):
    CONVERGES = "converges"
    DIVERGES = "diverges"
    UNKNOWN = "unknown"


class SeriesMethod(str, Enum):
    SYMBOLIC_RULE = "symbolic-rule"
    PARTIAL_SUM = "partial-sum"


@dataclass(frozen=True)
class SeriesVerdict:
    klass: SeriesClass
    method: SeriesMethod
    evidence: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.method is SeriesMethod.SYMBOLIC_RULE and self.klass is SeriesClass.UNKNOWN:
            raise DomainError("symbolic verdicts are never unknown")
        if self.method is SeriesMethod.PARTIAL_SUM and len(self.evidence) < 3:
            raise DomainError("partial-sum verdicts need at least 3 checkpoints")

    @property
    def converges(self) -> bool:
        return self.klass is SeriesClass.CONVERGES

    @property
    def diverges(self) -> bool:
        return self.klass is SeriesClass.DIVERGES


def _log_power_sum_converges(p: Fraction, q: Fraction, w: Fraction) -> bool:
    """sum t^p (ln t)^q (ln ln t)^w over integers t converges iff the triple
    (p+1, q+1, w+1) is lexicographically negative."""
    if p != -1:
        return p < -1
    if q != -1:
        return q < -1
    return w < -1


def classify_series(term: ExtendedLogPower) -> SeriesVerdict:
    """Convergence class of sum_{t >= r_min} term(t), decided exactly."""
    conv = _log_power_sum_converges(term.p, term.q, term.w)
    return SeriesVerdict(SeriesClass.CONVERGES if conv else SeriesClass.DIVERGES, SeriesMethod.SYMBOLIC_RULE)


#: partial-sum checkpoints used by the sampled (non-symbolic) fallback
PARTIAL_SUM_CHECKPOINTS = (10**3, 10**4, 10**5, 10**6)


def classify_partial_sums(checkpoints: Sequence[tuple]) -> SeriesVerdict:
    """Heuristic verdict from partial sums S(N) at increasing N.

    Declares a class only when the increments of the partial sums move in one
    consistent direction: geometric-type decay reads as convergence, steady
    or growing increments as divergence, anything murkier as unknown.
    """
    pts = sorted((int(n), float(s)) for n, s in checkpoints)
    if len(pts) < 4:
        raise DomainError("need at least 4 checkpoints")
    inc = [b[1] - a[1] for a, b in zip(pts, pts[1:])]
    if any(i < 0 for i in inc):
        raise DomainError("partial sums of a positive series must increase")
    if any(i == 0 for i in inc):
        klass = SeriesClass.CONVERGES
    else:
        ratios = [b / a for a, b in zip(inc, inc[1:])]
        if all(r <= 0.85 for r in ratios) and ratios[-1] <= ratios[0] + 1e-9:
            klass = SeriesClass.CONVERGES
        elif all(r >= 0.98 for r in ratios):
            klass = SeriesClass.DIVERGES
        else:
            klass = SeriesClass.UNKNOWN
    return SeriesVerdict(klass, SeriesMethod.PARTIAL_SUM, tuple(pts))


def condense_over_u(term: ExtendedLogPower, u: GeometricSequence, alpha: Rat = 0) -> SeriesVerdict:
    """Class of sum_n u_n^alpha * term(u_n) along u_n = k^n.

    Decided directly on the geometric side: with s = alpha + p the terms are
    k^{ns} n^q (ln n)^w up to constants, so the sum converges iff s < 0, or
    s = 0 and sum n^q (ln n)^w does.  This equals the class of
    sum_r r^{alpha-1} term(r); the equivalence is property-tested, not
    assumed, against :func:`classify_series`.
    """
    if not (term.eventually_decreasing() or term.tends_to_infinity() or term.is_constant()):
        raise DomainError("term must be eventually monotone")
    alpha = _frac(alpha)
    s = alpha + term.p
    if s < 0:
        conv = True
    elif s > 0:
        conv = False
    else:
        conv = _log_power_sum_converges(term.q, term.w, Fraction(0))
    return SeriesVerdict(SeriesClass.CONVERGES if conv else SeriesClass.DIVERGES, SeriesMethod.SYMBOLIC_RULE)


# ---------------------------------------------------------------------------
# u-regularity and the limit class of the mass-comparison function g
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegularityReport:
    regular: bool
    lam: Optional[float] = None
    witness_n: Optional[int] = None


def is_u_regular(h: ExtendedLogPower, u: GeometricSequence) -> RegularityReport:
    """Decreasing-by-a-fixed-factor test along u: h(u_{n+1}) <= lam * h(u_n).

    For this family the consecutive ratio tends to k^p exactly, so the test
    reduces to p < 0; the witness index is the first n past which sampled
    ratios stay within 1e-6 of the limit.
    """
    lam_limit = float(u.k) ** float(h.p)
    if h.p >= 0:
        return RegularityReport(False)
    lnk = math.log(float(u.k))

    def ratio(n: int) -> float:
        # h(u_{n+1})/h(u_n) in terms of n alone: ln u_n = n ln k
        out = lam_limit
        if h.q != 0:
            out *= ((n + 1) / n) ** float(h.q)
        if h.w != 0:
            out *= (math.log((n + 1) * lnk) / math.log(n * lnk)) ** float(h.w)
        return out

    n0 = 1
    while n0 * lnk <= math.log(h.r_min) or n0 * lnk <= 1.0:
        n0 += 1
    witness = n0
    for _ in range(80):
        if ratio(witness) <= lam_limit + 1e-6 and ratio(2 * witness) <= lam_limit + 1e-6:
            break
        witness *= 2
    return RegularityReport(True, lam_limit, witness)


class GClass(str, Enum):
    ZERO = "zero"
    FINITE_POSITIVE = "finite-positive"
    INFINITE = "infinite"


@dataclass(frozen=True)
class GReport:
    klass: GClass
    value: Optional[float]
    g: ExtendedLogPower


def compose_f_psi(f: ExtendedLogPower, psi: ExtendedLogPower) -> ExtendedLogPower:
    """Gauge-after-approximating-function composition f(psi(r)), asymptotically.

    With psi(r) = c r^a (ln r)^b (ln ln r)^e and a < 0 one has
    ln(1/psi(r)) = |a| ln r (1 + o(1)) and ln ln (1/psi(r)) = ln ln r (1+o(1)),
    so f(psi(r)) equals c_f c^{p_f} |a|^{q_f} r^{p_f a} (ln r)^{p_f b + q_f}
    (ln ln r)^{p_f e + w_f} up to a bounded factor.  The result is flagged
    asymptotic; every downstream use is a convergence class, which bounded
    factors cannot change.
    """
    if f.p <= 0:
        raise DomainError("gauge must have positive leading exponent to compose")
    if psi.p >= 0:
        raise DomainError("approximating function must have negative leading exponent")
    qabs = rational_pow(abs(psi.p), f.q)
    coeff = rational_pow(psi.coeff, f.p)
    if coeff is None:
        coeff = _frac(float(psi.coeff) ** float(f.p))
    if qabs is None:
        qabs = _frac(abs(float(psi.p)) ** float(f.q))
    return ExtendedLogPower(
        f.coeff * coeff * qabs,
        f.p * psi.p,
        f.p * psi.q + f.q,
        f.p * psi.w + f.w,
        psi.r_min,
        asymptotic=True,
    )


def mass_comparison_function(
    psi: ExtendedLogPower,
    rho: ExtendedLogPower,
    f: ExtendedLogPower,
    gamma: Rat,
    delta: Rat,
) -> ExtendedLogPower:
    """g(r) = f(psi(r)) * psi(r)^(-gamma) * rho(r)^(gamma - delta)."""
    gamma, delta = _frac(gamma), _frac(delta)
    if f.p == 1 and f.q == 0 and f.w == 0:
        fpsi = psi.power(1).scaled(f.coeff)  # identity gauge: f(psi) = c * psi
    else:
        fpsi = compose_f_psi(f, psi)
    return fpsi.times(psi.power(-gamma)).times(rho.power(gamma - delta))


def limsup_G(
    psi: ExtendedLogPower,
    rho: ExtendedLogPower,
    f: ExtendedLogPower,
    gamma: Rat,
    delta: Rat,
    u: GeometricSequence,
) -> GReport:
    """Limit class of g(u_n), exact for this family.

    Requires gamma < delta; the equal case is routed to the ambient-measure
    dichotomy by the verdict engine.
    """
    gamma, delta = _frac(gamma), _frac(delta)
    if not gamma < delta:
        raise DomainError("requires common dimension strictly below ambient dimension")
    g = mass_comparison_function(psi, rho, f, gamma, delta)
    if g.tends_to_zero():
        return GReport(GClass.ZERO, 0.0, g)
    if g.tends_to_infinity():
        return GReport(GClass.INFINITE, None, g)
    return GReport(GClass.FINITE_POSITIVE, float(g.coeff), g)
