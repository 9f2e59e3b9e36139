"""Rational self-maps of the projective line over Q(t).

A map f of degree d is carried around as a pair of homogeneous forms
(P, Q) in (z, w) with coefficients in Q(t) and nonzero resultant.  The
central quantity is the order function

    sigma(F, a) = min(v(P(A)), v(Q(A)))

at a place v, where A is a coordinate vector for the point a scaled so
that min(v(A_1), v(A_2)) = 0.  With the pair itself normalized so the
joint minimum of all coefficient valuations is 0, sigma is pinned
between 0 and v(Res F), and summing sigma along the orbit with weights
1/d^(n+1) produces the correction term between the naive and canonical
local heights.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence

from qtdyn.qt_arith import (
    INFINITY,
    FFElem,
    Place,
    Poly,
    format_ffelem,
    parse_expression,
    poly_valuation,
    residue,
    valuation,
)


# ---------------------------------------------------------------------------
# Polynomials and rational functions in z over Q(t)
# ---------------------------------------------------------------------------


class ZPoly:
    """Dense polynomial in z with coefficients in Q(t)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [c if isinstance(c, FFElem) else FFElem.from_rational(c)
              for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)

    @staticmethod
    def const(c) -> "ZPoly":
        return ZPoly([c])

    @staticmethod
    def z() -> "ZPoly":
        return ZPoly([FFElem.zero(), FFElem.one()])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> FFElem:
        if self.is_zero():
            raise ValueError("zero polynomial")
        return self.coeffs[-1]

    def __eq__(self, other) -> bool:
        if isinstance(other, ZPoly):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("ZPoly", self.coeffs))

    def __add__(self, other: "ZPoly") -> "ZPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return ZPoly(out)

    def __neg__(self) -> "ZPoly":
        return ZPoly([-c for c in self.coeffs])

    def __sub__(self, other: "ZPoly") -> "ZPoly":
        return self + (-other)

    def __mul__(self, other: "ZPoly") -> "ZPoly":
        if self.is_zero() or other.is_zero():
            return ZPoly()
        out = [FFElem.zero()] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return ZPoly(out)

    def scale(self, c: FFElem) -> "ZPoly":
        return ZPoly([a * c for a in self.coeffs])

    def __pow__(self, n: int) -> "ZPoly":
        result = ZPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def divmod(self, other: "ZPoly") -> tuple["ZPoly", "ZPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return ZPoly(), self
        quot = [FFElem.zero()] * (dq + 1)
        inv_lead = FFElem.one() / other.lead
        for k in range(dq, -1, -1):
            top = rem[k + other.degree]
            if top.is_zero():
                continue
            c = top * inv_lead
            quot[k] = c
            for j, b in enumerate(other.coeffs):
                rem[k + j] = rem[k + j] - c * b
        return ZPoly(quot), ZPoly(rem)

    def __mod__(self, other: "ZPoly") -> "ZPoly":
        return self.divmod(other)[1]

    def __floordiv__(self, other: "ZPoly") -> "ZPoly":
        return self.divmod(other)[0]

    def monic(self) -> "ZPoly":
        if self.is_zero():
            return self
        return self.scale(FFElem.one() / self.lead)

    def gcd(self, other: "ZPoly") -> "ZPoly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def derivative(self) -> "ZPoly":
        return ZPoly([c * i for i, c in enumerate(self.coeffs)][1:])

    def eval(self, x: FFElem) -> FFElem:
        acc = FFElem.zero()
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __repr__(self) -> str:
        return f"ZPoly({[format_ffelem(c) for c in self.coeffs]})"


class ZRat:
    """Reduced ratio of two ZPoly, denominator monic in z."""

    __slots__ = ("num", "den")

    def __init__(self, num: ZPoly, den: ZPoly = None):
        if den is None:
            den = ZPoly.const(1)
        if den.is_zero():
            raise ZeroDivisionError("denominator is zero")
        if num.is_zero():
            den = ZPoly.const(1)
        else:
            g = num.gcd(den)
            if g.degree > 0:
                num = num // g
                den = den // g
            inv = FFElem.one() / den.lead
            num = num.scale(inv)
            den = den.scale(inv)
        self.num = num
        self.den = den

    @staticmethod
    def const(c) -> "ZRat":
        return ZRat(ZPoly.const(c))

    @staticmethod
    def z() -> "ZRat":
        return ZRat(ZPoly.z())

    @staticmethod
    def one() -> "ZRat":
        return ZRat.const(1)

    def _coerce(self, other) -> "ZRat":
        if isinstance(other, ZRat):
            return other
        return ZRat.const(other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ZRat):
            other = self._coerce(other)
        return self.num == other.num and self.den == other.den

    def __add__(self, other) -> "ZRat":
        other = self._coerce(other)
        return ZRat(self.num * other.den + other.num * self.den,
                    self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "ZRat":
        return ZRat(-self.num, self.den)

    def __sub__(self, other) -> "ZRat":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "ZRat":
        return self._coerce(other) - self

    def __mul__(self, other) -> "ZRat":
        other = self._coerce(other)
        return ZRat(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ZRat":
        other = self._coerce(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return ZRat(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "ZRat":
        return self._coerce(other) / self

    def __pow__(self, n: int) -> "ZRat":
        if n < 0:
            return ZRat.one() / self ** (-n)
        return ZRat(self.num ** n, self.den ** n)

    def __repr__(self) -> str:
        return f"ZRat({self.num!r}, {self.den!r})"


# ---------------------------------------------------------------------------
# Homogeneous forms
# ---------------------------------------------------------------------------


class HPoly:
    """Homogeneous form in (z, w) over Q(t).

    coeffs[i] multiplies z^i w^(d-i); the tuple always has length d+1,
    zeros included, so the degree is part of the data.
    """

    __slots__ = ("d", "coeffs")

    def __init__(self, coeffs: Sequence, d: Optional[int] = None):
        cs = [c if isinstance(c, FFElem) else FFElem.from_rational(c)
              for c in coeffs]
        if d is None:
            d = len(cs) - 1
        if len(cs) != d + 1:
            raise ValueError("coefficient list does not match the degree")
        self.d = d
        self.coeffs = tuple(cs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HPoly):
            return NotImplemented
        return self.d == other.d and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(("HPoly", self.d, self.coeffs))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def __add__(self, other: "HPoly") -> "HPoly":
        if self.d != other.d:
            raise ValueError("cannot add forms of different degrees")
        return HPoly([a + b for a, b in zip(self.coeffs, other.coeffs)],
                     self.d)

    def __neg__(self) -> "HPoly":
        return HPoly([-c for c in self.coeffs], self.d)

    def __sub__(self, other: "HPoly") -> "HPoly":
        return self + (-other)

    def __mul__(self, other: "HPoly") -> "HPoly":
        out = [FFElem.zero()] * (self.d + other.d + 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return HPoly(out, self.d + other.d)

    def scale(self, c) -> "HPoly":
        if not isinstance(c, FFElem):
            c = FFElem.from_rational(c)
        return HPoly([a * c for a in self.coeffs], self.d)

    def eval(self, x: FFElem, y: FFElem) -> FFElem:
        """Evaluate at the coordinate vector (x, y)."""
        acc = FFElem.zero()
        xp = FFElem.one()
        # build z powers once, pair with matching w powers
        ypows = [FFElem.one()]
        for _ in range(self.d):
            ypows.append(ypows[-1] * y)
        for i, c in enumerate(self.coeffs):
            if not c.is_zero():
                acc = acc + c * xp * ypows[self.d - i]
            xp = xp * x
        return acc

    def eval_poly_pair(self, X: "Poly", Y: "Poly"):
        """Evaluate at polynomial coordinates, with no cancellation.

        Returns (N, D) with value N/D, where D only collects the
        coefficient denominators.  Avoiding the canonicalizing gcd of
        FFElem arithmetic keeps valuation queries cheap even when the
        coordinates are large.
        """
        D = Poly.const(1)
        for c in self.coeffs:
            if not c.is_zero():
                D = D * c.den
        ypows = [Poly.const(1)]
        for _ in range(self.d):
            ypows.append(ypows[-1] * Y)
        N = Poly.const(0)
        xp = Poly.const(1)
        for i, c in enumerate(self.coeffs):
            if not c.is_zero():
                N = N + c.num * (D // c.den) * xp * ypows[self.d - i]
            xp = xp * X
        return N, D

    def compose(self, u: "HPoly", v: "HPoly") -> "HPoly":
        """Substitute z -> u, w -> v for forms u, v of equal degree."""
        if u.d != v.d:
            raise ValueError("substituted forms must share a degree")
        out = HPoly([0] * (self.d * u.d + 1), self.d * u.d)
        upow = HPoly([1], 0)
        upows = [upow]
        for _ in range(self.d):
            upow = upow * u
            upows.append(upow)
        vpow = HPoly([1], 0)
        vpows = [vpow]
        for _ in range(self.d):
            vpow = vpow * v
            vpows.append(vpow)
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            out = out + (upows[i] * vpows[self.d - i]).scale(c)
        return out

    def dehomogenize(self) -> ZPoly:
        return ZPoly(self.coeffs)

    def swap(self) -> "HPoly":
        """Exchange z and w."""
        return HPoly(self.coeffs[::-1], self.d)

    def min_coeff_valuation(self, place: Place):
        """Minimum valuation over the nonzero coefficients."""
        vals = [valuation(c, place) for c in self.coeffs if not c.is_zero()]
        if not vals:
            return INFINITY
        return min(vals)

    def __repr__(self) -> str:
        return f"HPoly({[format_ffelem(c) for c in self.coeffs]})"


def homogenize(p: ZPoly, d: int) -> HPoly:
    if p.degree > d:
        raise ValueError("degree exceeds homogenization target")
    coeffs = list(p.coeffs) + [FFElem.zero()] * (d - p.degree)
    return HPoly(coeffs, d)


# ---------------------------------------------------------------------------
# Points of P^1(Q(t))
# ---------------------------------------------------------------------------


class _InfinityPoint:
    """Singleton marker for the point at infinity."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF_POINT"


INF_POINT = _InfinityPoint()


def point_from_ratio(x: FFElem, y: FFElem):
    if y.is_zero():
        if x.is_zero():
            raise ValueError("(0, 0) is not a projective point")
        return INF_POINT
    return x / y


def parse_point(text: str):
    text = text.strip()
    if text.lower() in ("inf", "infinity", "oo"):
        return INF_POINT
    from qtdyn.qt_arith import parse_ffelem

    return parse_ffelem(text)


def format_point(a) -> str:
    if a is INF_POINT:
        return "inf"
    return format_ffelem(a)


def point_coordinates(a, place: Place) -> tuple[FFElem, FFElem]:
    """Coordinates (A1, A2) for a with min(v(A1), v(A2)) = 0."""
    if a is INF_POINT:
        return FFElem.one(), FFElem.zero()
    if not isinstance(a, FFElem):
        a = FFElem.from_rational(a)
    if valuation(a, place) >= 0:
        return a, FFElem.one()
    return FFElem.one(), FFElem.one() / a


# ---------------------------------------------------------------------------
# The map itself
# ---------------------------------------------------------------------------


class HomogPair:
    """A degree-d rational map as a pair of coprime homogeneous forms."""

    __slots__ = ("P", "Q", "_res")

    def __init__(self, P: HPoly, Q: HPoly, check: bool = True):
        if P.d != Q.d:
            raise ValueError("the two forms must have the same degree")
        self.P = P
        self.Q = Q
        self._res = None
        if check and self.resultant().is_zero():
            raise ValueError("degenerate pair: the resultant vanishes")

    @property
    def d(self) -> int:
        return self.P.d

    def __eq__(self, other) -> bool:
        if not isinstance(other, HomogPair):
            return NotImplemented
        return self.P == other.P and self.Q == other.Q

    def resultant(self) -> FFElem:
        if self._res is None:
            self._res = _homog_resultant(self.P, self.Q)
        return self._res

    def scale(self, s) -> "HomogPair":
        """Multiply both forms by the same nonzero scalar."""
        pair = HomogPair(self.P.scale(s), self.Q.scale(s), check=False)
        return pair

    def apply(self, a):
        """Image of the point a under the map."""
        if a is INF_POINT:
            X, Y = Poly.const(1), Poly.const(0)
        else:
            X, Y = a.num, a.den
        # evaluate over plain polynomial coordinates so the only gcd per
        # step is the single canonicalization of the image itself
        pn, pd = self.P.eval_poly_pair(X, Y)
        qn, qd = self.Q.eval_poly_pair(X, Y)
        if qn.is_zero():
            if pn.is_zero():
                raise ZeroDivisionError("both forms vanish at the point")
            return INF_POINT
        return FFElem(pn * qd, qn * pd)

    def orbit(self, a, n: int) -> list:
        """[a, f(a), ..., f^n(a)]."""
        out = [a]
        for _ in range(n):
            out.append(self.apply(out[-1]))
        return out

    def compose(self, other: "HomogPair") -> "HomogPair":
        """self after other, as literal substitution without rescaling."""
        return HomogPair(self.P.compose(other.P, other.Q),
                         self.Q.compose(other.P, other.Q), check=False)

    def iterate(self, n: int) -> "HomogPair":
        if n < 1:
            raise ValueError("need at least one iterate")
        out = self
        for _ in range(n - 1):
            out = out.compose(self)
        return out

    def normalized_at(self, place: Place) -> "HomogPair":
        """Scale so the joint minimum of coefficient valuations is 0."""
        m = min(self.P.min_coeff_valuation(place),
                self.Q.min_coeff_valuation(place))
        if m == 0:
            return self
        u = place.uniformizer() ** (-m)
        pair = HomogPair(self.P.scale(u), self.Q.scale(u), check=False)
        pair._res = (None if self._res is None
                     else self._res * u ** (2 * self.d))
        return pair

    def as_zrat(self) -> ZRat:
        return ZRat(self.P.dehomogenize(), self.Q.dehomogenize())

    def __repr__(self) -> str:
        return f"HomogPair({self.P!r}, {self.Q!r})"


def _homog_resultant(P: HPoly, Q: HPoly) -> FFElem:
    """Resultant of two forms of equal degree d (2d x 2d Sylvester)."""
    d = P.d
    n = 2 * d
    prow = list(reversed(P.coeffs))
    qrow = list(reversed(Q.coeffs))
    mat = []
    for i in range(d):
        mat.append([FFElem.zero()] * i + prow
                   + [FFElem.zero()] * (d - 1 - i))
    for i in range(d):
        mat.append([FFElem.zero()] * i + qrow
                   + [FFElem.zero()] * (d - 1 - i))
    # Gaussian elimination; FFElem is a field so plain pivoting is exact
    det = FFElem.one()
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if not mat[r][col].is_zero():
                pivot = r
                break
        if pivot is None:
            return FFElem.zero()
        if pivot != col:
            mat[col], mat[pivot] = mat[pivot], mat[col]
            det = -det
        det = det * mat[col][col]
        inv = FFElem.one() / mat[col][col]
        for r in range(col + 1, n):
            if mat[r][col].is_zero():
                continue
            factor = mat[r][col] * inv
            for c in range(col, n):
                mat[r][c] = mat[r][c] - factor * mat[col][c]
    return det


def parse_map(text: str) -> HomogPair:
    """Parse a rational function of z over Q(t) into a homogeneous pair."""
    zr = parse_expression(
        text,
        {"z": ZRat.z(), "t": ZRat.const(FFElem.t())},
        ZRat.one(),
    )
    if not isinstance(zr, ZRat):
        zr = ZRat.const(zr)
    d = max(zr.num.degree, zr.den.degree)
    if d < 1:
        raise ValueError("the map must be nonconstant")
    return HomogPair(homogenize(zr.num, d), homogenize(zr.den, d))


# ---------------------------------------------------------------------------
# The order function sigma
# ---------------------------------------------------------------------------


def sigma_raw(pair: HomogPair, a, place: Place):
    """min(v(P(A)), v(Q(A))) with A scaled to min valuation 0.

    No normalization of the pair itself, so rescaling the pair by s
    shifts the value by v(s).
    """
    if a is INF_POINT:
        X, Y = Poly.const(1), Poly.const(0)
    else:
        X, Y = a.num, a.den
    # evaluate over plain polynomial coordinates: homogeneity makes the
    # d * min(v(X), v(Y)) correction equivalent to scaling the point to
    # min valuation 0, and no FFElem canonicalization ever runs
    m = min(poly_valuation(X, place), poly_valuation(Y, place))
    best = INFINITY
    for form in (pair.P, pair.Q):
        num, den = form.eval_poly_pair(X, Y)
        best = min(best,
                   poly_valuation(num, place) - poly_valuation(den, place))
    return best - pair.d * m


def sigma(pair: HomogPair, a, place: Place):
    """The order function of the pair normalized at the place."""
    return sigma_raw(pair.normalized_at(place), a, place)


def digit_sequence(pair: HomogPair, a, place: Place, n: int):
    """First n sigma values along the orbit, plus the orbit itself.

    Returns (digits, orbit) with len(digits) = n and len(orbit) = n + 1.
    """
    norm = pair.normalized_at(place)
    orbit = [a]
    digits = []
    for _ in range(n):
        digits.append(sigma_raw(norm, orbit[-1], place))
        orbit.append(norm.apply(orbit[-1]))
    return digits, orbit


def eta_partial(digits: Sequence, d: int) -> Fraction:
    """(1/d) * sum digits[n] / d^n over the given digits."""
    total = Fraction(0)
    for n, s in enumerate(digits):
        total += Fraction(s, d ** n)
    return total / d


def tail_bound(pair: HomogPair, place: Place, n: int) -> Fraction:
    """Upper bound for the part of eta beyond the first n digits."""
    norm = pair.normalized_at(place)
    vres = valuation(norm.resultant(), place)
    return Fraction(vres, norm.d ** n * (norm.d - 1))


def naive_term(a, place: Place) -> int:
    """-min(0, v(a)); zero for the point at infinity."""
    if a is INF_POINT:
        return 0
    v = valuation(a, place)
    if v == INFINITY:
        return 0
    return max(0, -v)


def rational_from_periodic_digits(digits: Sequence, preperiod: int,
                                  period: int, d: int) -> Fraction:
    """Exact eta for a digit sequence that repeats with the given shape.

    digits must contain at least preperiod + period entries; entries
    from position preperiod on repeat with the stated period.
    """
    if len(digits) < preperiod + period:
        raise ValueError("not enough digits for the claimed period")
    head = eta_partial(digits[:preperiod], d) if preperiod else Fraction(0)
    block = Fraction(0)
    for i in range(period):
        block += Fraction(digits[preperiod + i], d ** i)
    # geometric series for the repeating block
    tail = block / d / (1 - Fraction(1, d ** period))
    return head + tail / d ** preperiod


# ---------------------------------------------------------------------------
# Moebius conjugation
# ---------------------------------------------------------------------------


def mobius_apply(m, a):
    """Apply the fractional linear map with matrix m to a point."""
    x, y = point_coordinates(a, Place.infinity())
    return point_from_ratio(m[0][0] * x + m[0][1] * y,
                            m[1][0] * x + m[1][1] * y)


def mobius_inverse(m):
    """Adjugate matrix; same fractional linear map as the inverse."""
    return ((m[1][1], -m[0][1]), (-m[1][0], m[0][0]))


def conjugate(pair: HomogPair, m) -> "HomogPair":
    """m o f o m^(-1) as a homogeneous pair.

    Entries of m are FFElem (or coercible); the adjugate stands in for
    the inverse, which scales both forms by the same det factor and so
    does not change the map.
    """
    m = tuple(tuple(e if isinstance(e, FFElem) else FFElem.from_rational(e)
                    for e in row) for row in m)
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if det.is_zero():
        raise ValueError("conjugating matrix is singular")
    inv = mobius_inverse(m)
    l1 = HPoly([inv[0][1], inv[0][0]], 1)
    l2 = HPoly([inv[1][1], inv[1][0]], 1)
    u = pair.P.compose(l1, l2)
    v = pair.Q.compose(l1, l2)
    return HomogPair(u.scale(m[0][0]) + v.scale(m[0][1]),
                     u.scale(m[1][0]) + v.scale(m[1][1]), check=False)


class TransformRecord:
    """Height bookkeeping for a primitive conjugation.

    If g = mu o f o mu^(-1), the local canonical height of g at x is
    recovered from f's height at pullback_point(x) plus shift(x, place).
    """

    __slots__ = ("kind", "c")

    def __init__(self, kind: str, c: Optional[FFElem] = None):
        if kind not in ("identity", "scale", "translate", "invert"):
            raise ValueError(f"unknown conjugation kind {kind!r}")
        if kind in ("scale", "translate"):
            if c is None or (kind == "scale" and c.is_zero()):
                raise ValueError("this conjugation needs a nonzero parameter")
        self.kind = kind
        self.c = c

    def pullback_point(self, x):
        if self.kind == "identity":
            return x
        if self.kind == "scale":
            return INF_POINT if x is INF_POINT else x / self.c
        if self.kind == "translate":
            return INF_POINT if x is INF_POINT else x - self.c
        # invert
        if x is INF_POINT:
            return FFElem.zero()
        if x.is_zero():
            return INF_POINT
        return FFElem.one() / x

    def shift(self, x, place: Place) -> Fraction:
        """Additive correction: lambda_g(x) = lambda_f(pullback) + shift."""
        if self.kind in ("identity", "translate"):
            return Fraction(0)
        if self.kind == "scale":
            return Fraction(-valuation(self.c, place))
        # invert: the correction is v(1/x)
        if x is INF_POINT or x.is_zero():
            raise ValueError("inversion shift undefined at 0 and infinity")
        return Fraction(-valuation(x, place))

    def matrix(self):
        if self.kind == "identity":
            return ((FFElem.one(), FFElem.zero()),
                    (FFElem.zero(), FFElem.one()))
        if self.kind == "scale":
            return ((self.c, FFElem.zero()), (FFElem.zero(), FFElem.one()))
        if self.kind == "translate":
            return ((FFElem.one(), self.c), (FFElem.zero(), FFElem.one()))
        return ((FFElem.zero(), FFElem.one()),
                (FFElem.one(), FFElem.zero()))

    def __repr__(self) -> str:
        if self.c is None:
            return f"TransformRecord({self.kind})"
        return f"TransformRecord({self.kind}, {format_ffelem(self.c)})"


def conjugate_with_record(pair: HomogPair, kind: str,
                          c=None) -> tuple[HomogPair, TransformRecord]:
    """Conjugate by one of the primitive Moebius maps.

    kind 'scale' is z -> c*z, 'translate' is z -> z + c, 'invert' is
    z -> 1/z.  Returns the conjugated pair together with the record
    needed to pull local heights back through the change of variable.
    """
    if c is not None and not isinstance(c, FFElem):
        c = FFElem.from_rational(c)
    rec = TransformRecord(kind, c)
    return conjugate(pair, rec.matrix()), rec


# ---------------------------------------------------------------------------
# Factored presentations
# ---------------------------------------------------------------------------


class UnfactoredError(ValueError):
    """The zeros or poles of the map are not rational over Q(t)."""


class FactoredMap:
    """A map presented by its zeros and poles in P^1(Q(t)).

    f(z) = (c / u) * prod (z - z_i) / prod (z - p_j), where a zero or
    pole at infinity drops the corresponding linear factor and lowers
    the affine degree.  zeros and poles are lists of (point, mult).
    """

    __slots__ = ("c", "u", "zeros", "poles", "d")

    def __init__(self, c: FFElem, u: FFElem, zeros, poles):
        dz = sum(m for _, m in zeros)
        dp = sum(m for _, m in poles)
        if dz != dp:
            raise ValueError("zero and pole multiplicities must both sum "
                             "to the degree")
        if c.is_zero() or u.is_zero():
            raise ValueError("leading constants must be nonzero")
        self.c = c
        self.u = u
        self.zeros = list(zeros)
        self.poles = list(poles)
        self.d = dz

    @staticmethod
    def _form_for(point, place: Place) -> tuple[HPoly, FFElem]:
        """Linear form vanishing at the point, with coordinate vector
        normalized at the place; returns (form, correction) where
        (z - point*w) = correction * form for finite points."""
        if point is INF_POINT:
            return HPoly([1, 0], 1), FFElem.one()
        if valuation(point, place) >= 0:
            return HPoly([-point, FFElem.one()], 1), FFElem.one()
        inv = FFElem.one() / point
        # z - x w = x * ((1/x) z - w)
        return HPoly([FFElem.from_rational(-1), inv], 1), point

    def to_pair(self) -> HomogPair:
        """Homogeneous pair, with factor coordinates left raw."""
        P = HPoly([self.c], 0)
        for x, m in self.zeros:
            form = (HPoly([1, 0], 1) if x is INF_POINT
                    else HPoly([-x, FFElem.one()], 1))
            for _ in range(m):
                P = P * form
        Q = HPoly([self.u], 0)
        for x, m in self.poles:
            form = (HPoly([1, 0], 1) if x is INF_POINT
                    else HPoly([-x, FFElem.one()], 1))
            for _ in range(m):
                Q = Q * form
        return HomogPair(P, Q)

    def normalized_at(self, place: Place) -> "FactoredMap":
        """Scale so each factor has coordinates of minimum valuation 0
        and min(v(c), v(u)) = 0; the represented map is unchanged up to
        the usual joint-scalar ambiguity."""
        c, u = self.c, self.u
        for x, m in self.zeros:
            _, corr = self._form_for(x, place)
            c = c * corr ** m
        for x, m in self.poles:
            _, corr = self._form_for(x, place)
            u = u * corr ** m
        m0 = min(valuation(c, place), valuation(u, place))
        if m0 != 0:
            s = place.uniformizer() ** (-m0)
            c = c * s
            u = u * s
        return FactoredMap(c, u, self.zeros, self.poles)

    @staticmethod
    def from_pair(pair: HomogPair) -> "FactoredMap":
        zeros, c = _linear_factor_points(pair.P)
        poles, u = _linear_factor_points(pair.Q)
        fm = FactoredMap(c, u, zeros, poles)
        # the reconstruction must match; this also guards the factorizer
        rebuilt = fm.to_pair()
        if rebuilt.P != pair.P or rebuilt.Q != pair.Q:
            raise UnfactoredError("factored form does not reconstruct "
                                  "the input pair")
        return fm

    @staticmethod
    def from_text(text: str) -> "FactoredMap":
        return FactoredMap.from_pair(parse_map(text))

    def __repr__(self) -> str:
        return (f"FactoredMap(c={format_ffelem(self.c)}, "
                f"u={format_ffelem(self.u)}, zeros={self.zeros!r}, "
                f"poles={self.poles!r})")


def _linear_factor_points(form: HPoly):
    """Roots in P^1(Q(t)) of a homogeneous form, with multiplicities.

    Raises UnfactoredError when an irreducible factor has z-degree >= 2
    (a root living in a proper extension of Q(t)).
    """
    import sympy

    p = form.dehomogenize()
    if p.is_zero():
        raise ValueError("zero form has no factorization")
    points = []
    inf_mult = form.d - p.degree
    if inf_mult:
        points.append((INF_POINT, inf_mult))
    if p.degree == 0:
        return points, p.coeffs[0]
    z, t = sympy.symbols("z t")
    expr = sympy.Integer(0)
    for i, cf in enumerate(p.coeffs):
        num = sum(sympy.Rational(a.numerator, a.denominator) * t ** k
                  for k, a in enumerate(cf.num.coeffs))
        den = sum(sympy.Rational(a.numerator, a.denominator) * t ** k
                  for k, a in enumerate(cf.den.coeffs))
        expr += sympy.Rational(1) * num / den * z ** i
    expr = sympy.together(expr)
    numer, _ = sympy.fraction(expr)
    _, factors = sympy.factor_list(sympy.Poly(numer, z, t, domain="QQ"))
    for fac, mult in factors:
        pf = sympy.Poly(fac, z)
        if pf.degree() == 0:
            continue
        if pf.degree() >= 2:
            raise UnfactoredError(
                f"irreducible factor of z-degree {pf.degree()}")
        a1 = _sympy_t_to_ffelem(sympy.Poly(fac, z).nth(1))
        a0 = _sympy_t_to_ffelem(sympy.Poly(fac, z).nth(0))
        points.append((-a0 / a1, int(mult)))
    return points, p.lead


def _sympy_t_to_ffelem(expr) -> FFElem:
    import sympy

    t = sympy.Symbol("t")
    poly = sympy.Poly(sympy.expand(expr), t, domain="QQ")
    coeffs = [Fraction(c.p, c.q) for c in
              (sympy.Rational(v) for v in poly.all_coeffs()[::-1])]
    return FFElem(Poly(coeffs))


# ---------------------------------------------------------------------------
# Reduction of a pair at a degree-1 place
# ---------------------------------------------------------------------------


def residue_coeff_lists(pair: HomogPair, place: Place):
    """Residues of all coefficients at a degree-1 place.

    The pair should be normalized at the place first so every residue
    is finite.  Returns two lists of Fractions, ascending in z.
    """
    out = []
    for form in (pair.P, pair.Q):
        row = []
        for c in form.coeffs:
            r = residue(c, place)
            if r.at_infinity:
                raise ValueError("coefficient with negative valuation; "
                                 "normalize the pair first")
            row.append(r.as_fraction())
        out.append(row)
    return out[0], out[1]


def reduced_map(pair: HomogPair, place: Place) -> tuple[Poly, Poly]:
    """Reduction of the normalized pair at a degree-1 place.

    Returns (Pbar, Qbar) as polynomials over Q in one variable; these
    are the dehomogenized forms, so degree information at infinity must
    be recovered from the original degree d.
    """
    p_res, q_res = residue_coeff_lists(pair.normalized_at(place), place)
    return Poly(p_res), Poly(q_res)
