"""Degree-2 classification by fixed-point multiplier valuations.

The three fixed-point multipliers of a quadratic rational map satisfy
the exact relation s3 - s1 + 2 = 0 in elementary symmetric functions.
Their valuations at a place, read off a Newton polygon, decide a
trichotomy: potential good reduction, strongly polynomial-like (two
repelling multipliers of equal size plus one attracting), or the
existence of points with irrational local height, refined into four
sub-cases by the residues of the unit multipliers.

Also provided: the two-disk coding of the attracting normal form
(z(z - w), u*w*(p2*z - p1*w)) and construction of points realizing a
prescribed 0/1 itinerary through the disks.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import sympy

from qtdyn.maps import HPoly, HomogPair, sigma
from qtdyn.puiseux import (
    PuiseuxApprox,
    ffelem_to_puiseux,
    newton_lift,
    p_div,
    p_mul,
    p_add,
    pval,
)
from qtdyn.qt_arith import (
    INFINITY,
    FFElem,
    Place,
    Poly,
    residue,
    valuation,
)

__all__ = [
    "MultiplierData",
    "QuadClass",
    "CantorCoding",
    "mobius_conjugate",
    "fixed_point_multipliers",
    "newton_valuations",
    "unit_residues",
    "tau_squared",
    "kiwi_subcase",
    "classify",
    "cantor_coding",
    "irrational_witness",
]

_T = sympy.Symbol("t")
_Z = sympy.Symbol("z")
_X = sympy.Symbol("x")


# ---------------------------------------------------------------------------
# Exact conversions to and from sympy rational functions in t
# ---------------------------------------------------------------------------


def _poly_to_sympy(p: Poly):
    return sum((sympy.Rational(c.numerator, c.denominator) * _T ** i
                for i, c in enumerate(p.coeffs)), sympy.Integer(0))


def _ffelem_to_sympy(x: FFElem):
    return _poly_to_sympy(x.num) / _poly_to_sympy(x.den)


def _sympy_to_poly(expr) -> Poly:
    p = sympy.Poly(sympy.expand(expr), _T, domain="QQ")
    return Poly([Fraction(c.p, c.q) for c in reversed(p.all_coeffs())])


def _sympy_to_ffelem(expr) -> FFElem:
    num, den = sympy.fraction(sympy.cancel(sympy.together(expr)))
    return FFElem(_sympy_to_poly(num), _sympy_to_poly(den))


# ---------------------------------------------------------------------------
# Mobius conjugation
# ---------------------------------------------------------------------------


def _as_ffelem(c) -> FFElem:
    return c if isinstance(c, FFElem) else FFElem.from_rational(c)


def mobius_conjugate(pair: HomogPair, a, b, c, d) -> HomogPair:
    """M^(-1) o f o M for the fractional-linear map M(z) = (az+b)/(cz+d)."""
    a, b, c, d = (_as_ffelem(v) for v in (a, b, c, d))
    if (a * d - b * c).is_zero():
        raise ValueError("the conjugating matrix must be invertible")
    A1 = HPoly([b, a])
    A2 = HPoly([d, c])
    PA = pair.P.compose(A1, A2)
    QA = pair.Q.compose(A1, A2)
    return HomogPair(PA.scale(d) - QA.scale(b), QA.scale(a) - PA.scale(c))


# ---------------------------------------------------------------------------
# Multiplier extraction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiplierData:
    """Elementary symmetric functions s1, s2, s3 of the three
    fixed-point multipliers, the monic cubic they define (ascending
    coefficients of x^3 - s1 x^2 + s2 x - s3), and the multipliers
    themselves when that cubic splits over Q(t)."""

    s1: FFElem
    s2: FFElem
    s3: FFElem
    exact: Optional[tuple]

    @property
    def cubic(self) -> list:
        return [-self.s3, self.s2, -self.s1, FFElem.one()]

    @staticmethod
    def from_multipliers(alpha, beta, gamma) -> "MultiplierData":
        alpha, beta, gamma = (_as_ffelem(v) for v in (alpha, beta, gamma))
        return MultiplierData(alpha + beta + gamma,
                              alpha * beta + alpha * gamma + beta * gamma,
                              alpha * beta * gamma,
                              (alpha, beta, gamma))


def _multiplier_cubic_sympy(pair: HomogPair):
    """Monic cubic in x whose roots are the fixed-point multipliers,
    or None when the fixed-point divisor meets infinity (degree drop)."""
    pz = sum((_ffelem_to_sympy(c) * _Z ** i
              for i, c in enumerate(pair.P.coeffs)), sympy.Integer(0))
    qz = sum((_ffelem_to_sympy(c) * _Z ** i
              for i, c in enumerate(pair.Q.coeffs)), sympy.Integer(0))
    num, den = sympy.fraction(sympy.cancel(pz / qz))
    g = sympy.expand(num - _Z * den)
    if sympy.degree(g, _Z) != 3:
        return None
    deriv = sympy.expand(sympy.diff(num, _Z) * den - num * sympy.diff(den, _Z))
    h = sympy.expand(_X * den ** 2 - deriv)
    r = sympy.expand(sympy.resultant(g, h, _Z))
    rx = sympy.Poly(r, _X)
    if rx.degree() != 3:
        return None
    return rx


def fixed_point_multipliers(f: HomogPair, seed: int = 0) -> MultiplierData:
    """Extract the multiplier data of a degree-2 map.

    Configurations with a fixed point at infinity are moved by random
    rational Mobius conjugation (multipliers are conjugacy invariants);
    after 10 failed attempts the degeneracy is reported, never ignored.
    """
    if f.d != 2:
        raise ValueError("multiplier extraction needs a degree-2 map")
    rng = random.Random(seed)
    rx = _multiplier_cubic_sympy(f)
    attempts = 0
    while rx is None and attempts < 10:
        attempts += 1
        while True:
            a, b, c, d = (rng.randint(-9, 9) for _ in range(4))
            if a * d - b * c != 0:
                break
        rx = _multiplier_cubic_sympy(mobius_conjugate(f, a, b, c, d))
    if rx is None:
        raise RuntimeError(
            "multiplier extraction degenerate after 10 conjugation attempts")
    c3, c2, c1, c0 = rx.all_coeffs()
    s1 = _sympy_to_ffelem(-sympy.cancel(c2 / c3))
    s2 = _sympy_to_ffelem(sympy.cancel(c1 / c3))
    s3 = _sympy_to_ffelem(-sympy.cancel(c0 / c3))
    if not (s3 - s1 + FFElem.from_rational(2)).is_zero():
        raise RuntimeError("fixed-point multiplier relation violated")
    return MultiplierData(s1, s2, s3, _split_cubic(rx))


def _split_cubic(rx) -> Optional[tuple]:
    """Roots in Q(t) of the cubic, when it splits completely."""
    expr = sympy.together(rx.as_expr())
    num = sympy.fraction(expr)[0]
    _, factors = sympy.factor_list(num, _X, _T)
    roots = []
    for fac, mult in factors:
        dx = sympy.degree(fac, _X)
        if dx == 0:
            continue
        if dx != 1:
            return None
        p = sympy.Poly(fac, _X)
        lead, const = p.all_coeffs() if p.degree() == 1 else (1, 0)
        root = _sympy_to_ffelem(sympy.cancel(-const / lead))
        roots.extend([root] * mult)
    return tuple(roots) if len(roots) == 3 else None


# ---------------------------------------------------------------------------
# Newton polygon
# ---------------------------------------------------------------------------


def newton_valuations(cubic: Sequence, place: Place) -> list:
    """Root valuations (with multiplicity) of a cubic over Q(t) from
    the lower-hull slopes; roots that are literally zero contribute the
    +infinity marker."""
    coeffs = [_as_ffelem(c) for c in cubic]
    while coeffs and coeffs[-1].is_zero():
        coeffs.pop()
    if len(coeffs) < 2:
        raise ValueError("the polynomial must be nonconstant")
    order = next(i for i, c in enumerate(coeffs) if not c.is_zero())
    vals: list = [INFINITY] * order
    pts = [(i, valuation(c, place))
           for i, c in enumerate(coeffs) if not c.is_zero()]
    hull = _lower_hull(pts)
    for (i1, v1), (i2, v2) in zip(hull, hull[1:]):
        slope = Fraction(v2 - v1, i2 - i1)
        vals.extend([-slope] * (i2 - i1))
    return sorted(vals)


def _lower_hull(pts):
    hull: list = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # pop if the middle point is on or above the new chord
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def unit_residues(cubic: Sequence, place: Place) -> Optional[list]:
    """Residues of the valuation-zero roots, when they are rational.

    Reads the slope-zero segment of the Newton polygon and solves its
    residue polynomial over Q; returns None when there is no slope-zero
    segment, the place has degree > 1, or a root is irrational.
    """
    if place.degree != 1:
        return None
    coeffs = [_as_ffelem(c) for c in cubic]
    pts = [(i, valuation(c, place))
           for i, c in enumerate(coeffs) if not c.is_zero()]
    hull = _lower_hull(pts)
    for (i1, v1), (i2, v2) in zip(hull, hull[1:]):
        if v1 != v2:
            continue
        pi = place.uniformizer()
        seg = []
        for i in range(i1, i2 + 1):
            c = coeffs[i] * pi ** (-v1)
            rv = residue(c, place)
            seg.append(rv.as_fraction() if not rv.at_infinity else None)
        if any(s is None for s in seg):
            return None
        poly = sympy.Poly([sympy.Rational(s.numerator, s.denominator)
                           for s in reversed(seg)], _X)
        roots = []
        for root, mult in sympy.roots(poly, _X).items():
            if not root.is_rational:
                return None
            roots.extend([Fraction(int(root.p), int(root.q))] * mult)
        if len(roots) != i2 - i1:
            return None
        return roots
    return None


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

POTENTIAL_GOOD_REDUCTION = "PotentialGoodReduction"
STRONGLY_POLYNOMIAL_LIKE = "StronglyPolynomialLike"
IRRATIONAL_EXISTS = "IrrationalExists"
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class QuadClass:
    kind: str
    kiwi_case: Optional[Union[int, str]] = None

    def to_json(self):
        out = {"class": self.kind}
        if self.kind == IRRATIONAL_EXISTS:
            out["kiwi_case"] = self.kiwi_case
        return out


def tau_squared(alpha: FFElem, beta: FFElem, place: Place):
    """Valuation-and-residue test value r_v((alpha^2 - 1)/(1 - alpha*beta));
    the +infinity marker signals a pole of the ratio (negative valuation)."""
    one = FFElem.one()
    den = one - alpha * beta
    if den.is_zero():
        raise ValueError("alpha*beta = 1: the test ratio is undefined")
    ratio = (alpha * alpha - one) / den
    if valuation(ratio, place) < 0:
        return INFINITY
    rv = residue(ratio, place)
    return rv.as_fraction() if place.degree == 1 else rv.value


def kiwi_subcase(m: MultiplierData, place: Place):
    """Sub-classify the two-unit-multipliers configuration: 2, 3, 4, or
    the undetermined marker (rational roots of unity are only +-1, so
    nothing further can be decided over Q)."""
    vals = newton_valuations(m.cubic, place)
    if not (len(vals) == 3 and vals[0] < 0 and vals[1] == 0 and vals[2] == 0):
        raise ValueError("expected two unit multipliers and one pole")
    if m.exact is not None:
        units = [x for x in m.exact if valuation(x, place) == 0]
        rv = residue(units[0], place)
        lam = rv.as_fraction() if place.degree == 1 and not rv.at_infinity \
            else None
    else:
        res = unit_residues(m.cubic, place)
        lam = res[0] if res else None
    if lam is None:
        return UNDETERMINED
    if lam not in (1, -1):
        return 2
    if lam == 1:
        # multiplier exactly 1 forces a second multiplier exactly 1
        # (the fixed-point relation factors as (b-1)(c-1) = 0), and the
        # direction action at the fixed Type II point is then the
        # translation z + 1: still case 2.  Residue 1 without exact
        # equality stays undecided.
        if m.exact is not None and all(
                (x - FFElem.one()).is_zero()
                for x in m.exact if valuation(x, place) == 0):
            return 2
        return UNDETERMINED
    if m.exact is None:
        return UNDETERMINED
    units = [x for x in m.exact if valuation(x, place) == 0]
    t2 = tau_squared(units[0], units[1], place)
    return 4 if t2 == INFINITY else 3


def classify(f: HomogPair, place: Place, seed: int = 0) -> QuadClass:
    """The degree-2 trichotomy at a place, from multiplier valuations."""
    data = fixed_point_multipliers(f, seed=seed)
    vals = newton_valuations(data.cubic, place)
    if all(v >= 0 for v in vals):
        return QuadClass(POTENTIAL_GOOD_REDUCTION)
    if any(v > 0 for v in vals):
        negs = [v for v in vals if v < 0]
        if len(negs) != 2:
            raise RuntimeError(f"impossible valuation multiset {vals}")
        if negs[0] == negs[1]:
            return QuadClass(STRONGLY_POLYNOMIAL_LIKE)
        return QuadClass(IRRATIONAL_EXISTS, 1)
    return QuadClass(IRRATIONAL_EXISTS, kiwi_subcase(data, place))


# ---------------------------------------------------------------------------
# Two-disk coding of the attracting normal form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CantorCoding:
    """Coding data of (z(z-w), u*w*(p2*z - p1*w)): the order-function
    values on the disks around 0 and 1 of radius |u|, and whether they
    coincide (exactly when v(p) = v(p-1))."""

    sigma0: int
    sigma1: int
    radius_valuation: int
    equal: bool
    pair: HomogPair


def cantor_pair(u: FFElem, p: FFElem) -> HomogPair:
    """The normal form (z(z - w), u*w*(p2*z - p1*w)) with p = p1/p2."""
    p1, p2 = FFElem(p.num), FFElem(p.den)
    P = HPoly([FFElem.zero(), -FFElem.one(), FFElem.one()])
    Q = HPoly([-u * p1, u * p2, FFElem.zero()])
    return HomogPair(P, Q)


def cantor_coding(u: FFElem, p: FFElem,
                  place: Place = None) -> CantorCoding:
    place = place or Place.at_t()
    vu = valuation(u, place)
    if vu == INFINITY or vu <= 0:
        raise ValueError("normal form requires v(u) > 0")
    vp = valuation(p, place)
    if vp == INFINITY or vp < 0:
        raise ValueError("the pole parameter must be integral at the place")
    vp1 = valuation(p - FFElem.one(), place)
    s0 = vu + vp if vp > 0 else vu
    s1 = vu + vp1 if (vp1 != INFINITY and vp1 > 0) else \
        (vu if vp1 != INFINITY else None)
    if s1 is None:
        raise ValueError("p = 1 puts the pole at a disk center")
    return CantorCoding(s0, s1, vu, vp == vp1, cantor_pair(u, p))


def irrational_witness(u: FFElem, p: FFElem, bits: Sequence[int],
                       place: Place = None, cutoff=None):
    """A point whose first len(bits) order-function digits follow the
    prescribed disk itinerary, built by backward Newton lifting, plus
    the digits re-verified by direct evaluation along the orbit.

    Requires unequal disk values (otherwise the itinerary carries no
    digit information)."""
    place = place or Place.at_t()
    if not place.is_infinite and place.pi != Poly.t():
        raise ValueError("series construction expands around t = 0")
    coding = cantor_coding(u, p, place)
    if coding.equal:
        raise ValueError("the two disks have equal order values")
    bits = [int(b) for b in bits]
    if any(b not in (0, 1) for b in bits):
        raise ValueError("the itinerary must be a 0/1 sequence")
    n = len(bits)
    big = max(coding.sigma0, coding.sigma1)
    cutoff = Fraction(cutoff) if cutoff is not None \
        else Fraction(4 + (big + 1) * (n + 1))
    pair = coding.pair

    x = PuiseuxApprox.const(bits[-1], cutoff)
    for b in reversed(bits):
        seed = PuiseuxApprox.const(b, cutoff)
        x = newton_lift(pair, x, seed)
    digits = _verify_digits(pair, x, n)
    return x, digits


def _verify_digits(pair: HomogPair, x: PuiseuxApprox, n: int) -> list:
    """Order-function digits of the forward orbit, evaluated directly
    in series arithmetic; the pair must already have min coefficient
    valuation 0 and the point valuation must be >= 0."""
    pc = [ffelem_to_puiseux(c, x.cutoff, x.tol) for c in pair.P.coeffs]
    qc = [ffelem_to_puiseux(c, x.cutoff, x.tol) for c in pair.Q.coeffs]
    digits = []
    for _ in range(n):
        pe = _horner(pc, x)
        qe = _horner(qc, x)
        digits.append(min(pval(pe), pval(qe)))
        x = p_div(pe, qe)
    return digits


def _horner(coeffs, x):
    acc = PuiseuxApprox.zero(x.cutoff, x.tol)
    for c in reversed(coeffs):
        acc = p_add(p_mul(acc, x), c)
    return acc
