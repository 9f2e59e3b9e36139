"""Truncated Puiseux-series arithmetic with arbitrary-precision complex
coefficients.

A PuiseuxApprox is a finite sum of c * t^e with rational exponents,
known modulo t^cutoff; coefficients of magnitude at most tol are
treated as zero.  This is the approximate model of the completed
algebraically closed coefficient field in which constructed points
live: the constructions only ever need valuations and residue
directions, and those survive controlled rounding with tol as the
explicit arbiter of "zero".

Exponent denominators are capped by RAMIFICATION_BOUND; square roots
double the ramification at most once per call, so hitting the bound
signals misuse rather than being silently absorbed.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from qtdyn.qt_arith import INFINITY, FFElem, Poly

__all__ = [
    "RAMIFICATION_BOUND",
    "PrecisionBudget",
    "PuiseuxApprox",
    "p_add",
    "p_neg",
    "p_sub",
    "p_mul",
    "p_div",
    "p_sqrt",
    "pval",
    "ffelem_to_puiseux",
    "newton_lift",
    "format_puiseux",
    "parse_puiseux",
]

RAMIFICATION_BOUND = 2 ** 16


@dataclass(frozen=True)
class PrecisionBudget:
    """Knobs for series precision: absolute cutoff exponent, coefficient
    tolerance, ramification cap, and float working precision in bits."""

    cutoff: Fraction = Fraction(24)
    tol: float = 1e-20
    ramification_bound: int = RAMIFICATION_BOUND
    float_bits: int = 128

    def __post_init__(self):
        object.__setattr__(self, "cutoff", Fraction(self.cutoff))
        if self.cutoff <= 0:
            raise ValueError("cutoff must be positive")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if self.float_bits < 64:
            raise ValueError("float precision must be at least 64 bits")
        if self.ramification_bound < 1:
            raise ValueError("ramification bound must be positive")


DEFAULT_BUDGET = PrecisionBudget()


def _with_budget_precision(fn):
    """Run coefficient arithmetic at the budget's float precision; the
    ambient mpmath precision (53 bits) is coarser than the default
    coefficient tolerance."""
    import functools

    @functools.wraps(fn)
    def wrapped(*args, **kwargs):
        with mpmath.workprec(DEFAULT_BUDGET.float_bits):
            return fn(*args, **kwargs)
    return wrapped


class PuiseuxApprox:
    """Finite Puiseux polynomial known modulo t^cutoff.

    terms: ascending tuple of (Fraction exponent, mpmath.mpc
    coefficient); exponents are strictly below cutoff and every stored
    coefficient has magnitude above tol.
    """

    __slots__ = ("terms", "cutoff", "tol")

    def __init__(self, terms, cutoff, tol: float = DEFAULT_BUDGET.tol):
        cutoff = Fraction(cutoff)
        merged: dict = {}
        for e, c in terms:
            if type(e) is not Fraction:
                e = Fraction(e)
            if e.denominator > RAMIFICATION_BOUND:
                raise ValueError("ramification bound exceeded")
            if e >= cutoff:
                continue
            if type(c) is not mpmath.mpc:
                c = mpmath.mpc(c)
            prev = merged.get(e)
            merged[e] = c if prev is None else prev + c
        # max-norm magnitude test: same reals behaviour, no hypot
        kept = [(e, c) for e, c in merged.items()
                if abs(c.real) > tol or abs(c.imag) > tol]
        kept.sort(key=lambda t: t[0])
        self.terms = tuple(kept)
        self.cutoff = cutoff
        self.tol = tol

    # -- constructors --------------------------------------------------

    @staticmethod
    def zero(cutoff, tol: float = DEFAULT_BUDGET.tol) -> "PuiseuxApprox":
        return PuiseuxApprox([], cutoff, tol)

    @staticmethod
    def const(c, cutoff=DEFAULT_BUDGET.cutoff,
              tol: float = DEFAULT_BUDGET.tol) -> "PuiseuxApprox":
        return PuiseuxApprox([(Fraction(0), c)], cutoff, tol)

    @staticmethod
    def t_power(e, cutoff=DEFAULT_BUDGET.cutoff,
                tol: float = DEFAULT_BUDGET.tol) -> "PuiseuxApprox":
        return PuiseuxApprox([(Fraction(e), 1)], cutoff, tol)

    # -- inspection ----------------------------------------------------

    def is_zero(self) -> bool:
        """Indistinguishable from zero at this cutoff and tolerance."""
        return not self.terms

    @property
    def lead_exponent(self) -> Fraction:
        """Least stored exponent; the cutoff itself when nothing is
        stored (the natural 'at least this' reading)."""
        return self.terms[0][0] if self.terms else self.cutoff

    @property
    def rel_precision(self) -> Fraction:
        return self.cutoff - self.lead_exponent

    def coefficient(self, e) -> mpmath.mpc:
        e = Fraction(e)
        for ex, c in self.terms:
            if ex == e:
                return c
        return mpmath.mpc(0)

    def __repr__(self):
        return f"PuiseuxApprox({format_puiseux(self)!r})"

    def __eq__(self, other):
        if not isinstance(other, PuiseuxApprox):
            return NotImplemented
        return (self.cutoff == other.cutoff
                and [e for e, _ in self.terms] == [e for e, _ in other.terms]
                and all(abs(a - b) <= max(self.tol, other.tol)
                        for (_, a), (_, b) in zip(self.terms, other.terms)))


def _shift(x: PuiseuxApprox, e) -> PuiseuxApprox:
    """Multiply by t^e exactly."""
    e = Fraction(e)
    return PuiseuxApprox([(ex + e, c) for ex, c in x.terms],
                         x.cutoff + e, x.tol)


def _scale(x: PuiseuxApprox, c) -> PuiseuxApprox:
    return PuiseuxApprox([(e, cf * mpmath.mpc(c)) for e, cf in x.terms],
                         x.cutoff, x.tol)


@_with_budget_precision
def p_add(x: PuiseuxApprox, y: PuiseuxApprox) -> PuiseuxApprox:
    return PuiseuxApprox(list(x.terms) + list(y.terms),
                         min(x.cutoff, y.cutoff), max(x.tol, y.tol))


@_with_budget_precision
def p_neg(x: PuiseuxApprox) -> PuiseuxApprox:
    return _scale(x, -1)


@_with_budget_precision
def p_sub(x: PuiseuxApprox, y: PuiseuxApprox) -> PuiseuxApprox:
    return p_add(x, p_neg(y))


@_with_budget_precision
def p_mul(x: PuiseuxApprox, y: PuiseuxApprox) -> PuiseuxApprox:
    # each factor's unknown tail enters shifted by the other's leading
    # exponent, so the product is known modulo the smaller of the two
    cut = min(x.cutoff + y.lead_exponent, y.cutoff + x.lead_exponent)
    terms = [(ex + ey, cx * cy)
             for ex, cx in x.terms for ey, cy in y.terms]
    return PuiseuxApprox(terms, cut, max(x.tol, y.tol))


def _geometric_inverse(u: PuiseuxApprox) -> PuiseuxApprox:
    """1/(1+u) for u of strictly positive valuation, as a truncated
    geometric series; u.cutoff bounds everything so the sum is finite."""
    one = PuiseuxApprox.const(1, u.cutoff, u.tol)
    if u.is_zero():
        return one
    d = p_add(one, u)
    inv = one
    # Newton doubling: correct exponents double each round, so the
    # loop runs O(log(cutoff / v(u))) times
    known = u.lead_exponent
    while known < u.cutoff:
        err = p_sub(one, p_mul(d, inv))
        if err.is_zero():
            break
        inv = p_add(inv, p_mul(inv, err))
        known *= 2
    return PuiseuxApprox(inv.terms, u.cutoff, u.tol)


def _split_unit(x: PuiseuxApprox):
    """x = c * t^e * (1 + u) with v(u) > 0; returns (e, c, u)."""
    e, c = x.terms[0]
    unit = _scale(_shift(x, -e), 1 / c)
    u = p_sub(unit, PuiseuxApprox.const(1, unit.cutoff, unit.tol))
    return e, c, u


@_with_budget_precision
def p_div(x: PuiseuxApprox, y: PuiseuxApprox) -> PuiseuxApprox:
    if y.is_zero():
        raise ZeroDivisionError("division by numerical zero")
    e, c, u = _split_unit(y)
    inv = _scale(_shift(_geometric_inverse(u), -e), 1 / c)
    return p_mul(x, inv)


@_with_budget_precision
def p_sqrt(x: PuiseuxApprox) -> PuiseuxApprox:
    """A square root with principal-branch leading coefficient."""
    if x.is_zero():
        raise ValueError("square root of numerical zero")
    e, c, u = _split_unit(x)
    half = e / 2
    if half.denominator > RAMIFICATION_BOUND:
        raise ValueError("ramification bound exceeded")
    # binomial series for (1+u)^(1/2); exact Fraction binomials keep
    # the coefficient error down to float rounding
    rel = u.cutoff
    acc = PuiseuxApprox.const(1, rel, u.tol)
    power = acc
    coeff = Fraction(1)
    k = 0
    gap = u.lead_exponent
    while not u.is_zero() and k * gap < rel:
        k += 1
        coeff *= Fraction(3 - 2 * k, 2 * k)     # binom(1/2, k) recurrence
        power = p_mul(power, u)
        power = PuiseuxApprox(power.terms, rel, u.tol)
        term = _scale(power, mpmath.mpf(coeff.numerator)
                      / mpmath.mpf(coeff.denominator))
        acc = p_add(acc, term)
        if power.is_zero():
            break
    acc = PuiseuxApprox(acc.terms, rel, u.tol)
    return _scale(_shift(acc, half), mpmath.sqrt(mpmath.mpc(c)))


def pval(x: PuiseuxApprox):
    """Least exponent carrying a coefficient above tolerance, or the
    +infinity marker meaning 'zero at this precision'."""
    return x.terms[0][0] if x.terms else INFINITY


# ---------------------------------------------------------------------------
# Exact data -> series
# ---------------------------------------------------------------------------


def _poly_to_puiseux(p: Poly, cutoff, tol) -> PuiseuxApprox:
    return PuiseuxApprox(
        [(Fraction(i), mpmath.mpf(c.numerator) / mpmath.mpf(c.denominator))
         for i, c in enumerate(p.coeffs)], cutoff, tol)


@_with_budget_precision
def ffelem_to_puiseux(x: FFElem, cutoff=DEFAULT_BUDGET.cutoff,
                      tol: float = DEFAULT_BUDGET.tol) -> PuiseuxApprox:
    """Laurent-Puiseux expansion of an element of Q(t) around t = 0."""
    num = _poly_to_puiseux(x.num, cutoff, tol)
    if x.den.degree == 0 and x.den.coeffs and x.den.coeffs[0] == 1:
        return num
    return p_div(num, _poly_to_puiseux(x.den, cutoff, tol))


# ---------------------------------------------------------------------------
# Newton lifting of preimages
# ---------------------------------------------------------------------------


def _poly_eval(coeffs: list, x: PuiseuxApprox) -> PuiseuxApprox:
    acc = PuiseuxApprox.zero(x.cutoff, x.tol)
    for c in reversed(coeffs):
        acc = p_add(p_mul(acc, x), c)
    return acc


@_with_budget_precision
def newton_lift(f, target: PuiseuxApprox, seed: PuiseuxApprox,
                max_steps: int = 64) -> PuiseuxApprox:
    """Solve f(x) = target by Newton iteration from an approximate root.

    f is a homogeneous pair; the iteration runs on the polynomial
    g(z) = P(z, 1) - target * Q(z, 1), whose roots are the affine
    preimages of target.  The seed must be a simple approximate root:
    v(g(seed)) strictly exceeds v(g'(seed)).  The output agrees with
    the seed in its leading terms and has numerically zero residual at
    the cutoff.
    """
    cutoff = min(seed.cutoff, target.cutoff)
    tol = max(seed.tol, target.tol)
    g = []
    for i in range(f.d + 1):
        pc = ffelem_to_puiseux(f.P.coeffs[i], cutoff, tol)
        qc = ffelem_to_puiseux(f.Q.coeffs[i], cutoff, tol)
        g.append(p_sub(pc, p_mul(target, qc)))
    dg = [_scale(c, i) for i, c in enumerate(g)][1:]

    x = PuiseuxApprox(seed.terms, cutoff, tol)
    res = _poly_eval(g, x)
    r = pval(res)
    if r == INFINITY:
        return x
    dv = pval(_poly_eval(dg, x))
    if dv == INFINITY or dv >= r:
        raise ValueError(
            "Newton condition fails: the seed is not a simple "
            "approximate root at this precision")
    last = r
    for _ in range(max_steps):
        step = p_div(res, _poly_eval(dg, x))
        x = p_sub(x, step)
        x = PuiseuxApprox(x.terms, cutoff, tol)
        res = _poly_eval(g, x)
        r = pval(res)
        if r == INFINITY:
            return x
        if r <= last:
            raise RuntimeError("Newton iteration stalled before the cutoff")
        last = r
    raise RuntimeError("Newton iteration did not converge in the budget")


# ---------------------------------------------------------------------------
# Canonical text form
# ---------------------------------------------------------------------------


def _format_coeff(c: mpmath.mpc) -> str:
    if abs(c.imag) == 0:
        return mpmath.nstr(c.real, 17, strip_zeros=True)
    return "(%s%s%sj)" % (mpmath.nstr(c.real, 17, strip_zeros=True),
                          "+" if c.imag >= 0 else "-",
                          mpmath.nstr(abs(c.imag), 17, strip_zeros=True))


def format_puiseux(x: PuiseuxApprox) -> str:
    """`c_1*t^(e_1) + ... + O(t^E)` with exact rational exponents."""
    parts = []
    for e, c in x.terms:
        if e == 0:
            parts.append(_format_coeff(c))
        else:
            parts.append(f"{_format_coeff(c)}*t^({e})")
    parts.append(f"O(t^({x.cutoff}))")
    return " + ".join(parts)


_TERM_RE = re.compile(
    r"^\s*(?P<coeff>\([^)]*\)|[^*]+?)\s*(?:\*\s*t\^\((?P<exp>-?\d+(?:/\d+)?)\))?\s*$")
_BIG_O_RE = re.compile(r"^\s*O\(t\^\((?P<cut>-?\d+(?:/\d+)?)\)\)\s*$")


def parse_puiseux(text: str,
                  tol: float = DEFAULT_BUDGET.tol) -> PuiseuxApprox:
    chunks = text.split(" + ")
    cut = None
    terms = []
    for chunk in chunks:
        m = _BIG_O_RE.match(chunk)
        if m:
            cut = Fraction(m.group("cut"))
            continue
        m = _TERM_RE.match(chunk)
        if not m:
            raise ValueError(f"unreadable series term: {chunk!r}")
        raw = m.group("coeff").strip()
        if raw.startswith("("):
            coeff = complex(raw[1:-1].replace(" ", ""))
        else:
            coeff = mpmath.mpf(raw)
        exp = Fraction(m.group("exp")) if m.group("exp") else Fraction(0)
        terms.append((exp, coeff))
    if cut is None:
        raise ValueError("missing O(t^(E)) cutoff marker")
    return PuiseuxApprox(terms, cut, tol)
