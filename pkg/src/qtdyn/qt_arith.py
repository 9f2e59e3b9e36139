"""Exact arithmetic in the rational function field Q(t).

Elements are reduced ratios of polynomials in t with rational
coefficients.  Every place of the field is either a monic irreducible
polynomial pi in Q[t] (the "finite" places) or the degree place at
infinity.  The module provides valuations, residues, a product-formula
check weighted by place degrees, and a small expression parser.

Canonical forms are maintained everywhere so that equality is
structural: polynomial gcds are divided out and denominators are kept
monic.  This makes elements hashable, which the orbit machinery relies
on for cycle detection.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

RatLike = Union[int, Fraction]

INFINITY = float("inf")


class Poly:
    """A dense univariate polynomial in t over Q.

    Coefficients are stored ascending by exponent with no trailing
    zeros; the zero polynomial has an empty coefficient tuple.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[RatLike] = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    # -- construction helpers ------------------------------------------

    @staticmethod
    def const(c: RatLike) -> "Poly":
        return Poly([Fraction(c)])

    @staticmethod
    def t() -> "Poly":
        return Poly([0, 1])

    # -- basic queries -------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree, with the convention deg 0 = -1."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> Fraction:
        if self.is_zero():
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self == Poly.const(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("Poly", self.coeffs))

    # -- ring operations -----------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if self.is_zero() or other.is_zero():
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    def scale(self, c: RatLike) -> "Poly":
        c = Fraction(c)
        return Poly([a * c for a in self.coeffs])

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly(), self
        quot = [Fraction(0)] * (dq + 1)
        dlead = other.lead
        for k in range(dq, -1, -1):
            top = rem[k + other.degree]
            if top == 0:
                continue
            c = top / dlead
            quot[k] = c
            for j, b in enumerate(other.coeffs):
                rem[k + j] -= c * b
        return Poly(quot), Poly(rem)

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    def __floordiv__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[0]

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self.scale(1 / self.lead)

    def primitive(self) -> "Poly":
        """self divided by its content (primitive integer coefficients)."""
        if self.is_zero():
            return self
        return self.scale(1 / self.content())

    def gcd(self, other: "Poly") -> "Poly":
        """Monic greatest common divisor.

        Remainders are reduced to primitive form at every step; the
        plain Euclidean sequence over Fraction coefficients blows up
        exponentially already around degree 30.
        """
        a, b = self.primitive(), other.primitive()
        if not a.is_zero() and not b.is_zero() and (
                min(a.degree, b.degree) > 16
                or max(c.numerator.bit_length()
                       for p in (a, b) for c in p.coeffs) > 128):
            return _big_gcd(a, b)
        while not b.is_zero():
            a, b = b, (a % b).primitive()
        return a.monic()

    def derivative(self) -> "Poly":
        return Poly([i * c for i, c in enumerate(self.coeffs)][1:])

    def eval(self, x: RatLike) -> Fraction:
        x = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_in(self, x, one):
        """Horner evaluation in an arbitrary commutative ring.

        `one` must be the multiplicative identity of the target ring so
        the rational coefficients can be embedded.
        """
        acc = one - one
        for c in reversed(self.coeffs):
            acc = acc * x + one * c if isinstance(c, Fraction) else acc * x + c
        return acc

    # integer-content normalization, used for canonical projective points
    def content(self) -> Fraction:
        """Positive rational c with self = c * (primitive integer poly)."""
        if self.is_zero():
            return Fraction(1)
        from math import gcd as igcd

        num_gcd = 0
        den_lcm = 1
        for c in self.coeffs:
            num_gcd = igcd(num_gcd, abs(c.numerator))
            den_lcm = den_lcm * c.denominator // igcd(den_lcm, c.denominator)
        return Fraction(num_gcd, den_lcm)

    def __repr__(self) -> str:
        return f"Poly({format_poly(self)!r})"


def _big_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd of two primitive integer polynomials via sympy.

    The subresultant coefficient growth of the in-house routine is
    prohibitive once degrees pass a few dozen; sympy's ZZ gcd stays
    fast there.
    """
    from sympy import ZZ
    from sympy.polys.rings import ring

    R, _ = ring("t", ZZ)
    fa = R.from_list([int(c) for c in reversed(a.coeffs)])
    fb = R.from_list([int(c) for c in reversed(b.coeffs)])
    g = fa.gcd(fb)
    coeffs = [Fraction(int(c)) for c in reversed(g.to_dense())]
    return Poly(coeffs).monic()


def format_poly(p: Poly, var: str = "t") -> str:
    """Render a polynomial so the expression parser reads it back."""
    if p.is_zero():
        return "0"
    parts = []
    for i in range(p.degree, -1, -1):
        c = p.coeffs[i]
        if c == 0:
            continue
        if i == 0:
            mono = _format_fraction(abs(c))
        else:
            tpow = var if i == 1 else f"{var}^{i}"
            if abs(c) == 1:
                mono = tpow
            else:
                mono = f"{_format_fraction(abs(c))}*{tpow}"
        if not parts:
            parts.append(mono if c > 0 else f"-{mono}")
        else:
            parts.append(f"+ {mono}" if c > 0 else f"- {mono}")
    return " ".join(parts)


def _format_fraction(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


class FFElem:
    """An element of Q(t) in canonical form.

    The denominator is monic and coprime to the numerator; the zero
    element is 0/1.  All arithmetic preserves the canonical form, so
    `==` and `hash` are structural.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly = None, _canonical: bool = False):
        if den is None:
            den = Poly.const(1)
        if den.is_zero():
            raise ZeroDivisionError("denominator is the zero polynomial")
        if not _canonical:
            if num.is_zero():
                den = Poly.const(1)
            else:
                g = num.gcd(den)
                if g.degree > 0:
                    num = num // g
                    den = den // g
                lead = den.lead
                if lead != 1:
                    num = num.scale(1 / lead)
                    den = den.scale(1 / lead)
        self.num = num
        self.den = den

    # -- constructors --------------------------------------------------

    @staticmethod
    def from_rational(c: RatLike) -> "FFElem":
        return FFElem(Poly.const(c), Poly.const(1), _canonical=True)

    @staticmethod
    def t() -> "FFElem":
        return FFElem(Poly.t(), Poly.const(1), _canonical=True)

    @staticmethod
    def zero() -> "FFElem":
        return FFElem(Poly(), Poly.const(1), _canonical=True)

    @staticmethod
    def one() -> "FFElem":
        return FFElem.from_rational(1)

    # -- queries -------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.degree <= 0 and self.den.degree == 0

    def as_fraction(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("element is not a constant")
        if self.is_zero():
            return Fraction(0)
        return self.num.coeffs[0] / self.den.coeffs[0]

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, FFElem):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return self == FFElem.from_rational(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("FFElem", self.num.coeffs, self.den.coeffs))

    # -- field operations ----------------------------------------------

    def _coerce(self, other) -> "FFElem":
        if isinstance(other, FFElem):
            return other
        if isinstance(other, (int, Fraction)):
            return FFElem.from_rational(other)
        raise TypeError(f"cannot coerce {other!r} into Q(t)")

    def __add__(self, other) -> "FFElem":
        other = self._coerce(other)
        return FFElem(self.num * other.den + other.num * self.den,
                      self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "FFElem":
        return FFElem(-self.num, self.den, _canonical=True)

    def __sub__(self, other) -> "FFElem":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "FFElem":
        return self._coerce(other) - self

    def __mul__(self, other) -> "FFElem":
        other = self._coerce(other)
        return FFElem(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "FFElem":
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero element of Q(t)")
        return FFElem(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "FFElem":
        return self._coerce(other) / self

    def __pow__(self, n: int) -> "FFElem":
        if n < 0:
            return FFElem.one() / (self ** (-n))
        return FFElem(self.num ** n, self.den ** n)

    def __repr__(self) -> str:
        return f"FFElem({format_ffelem(self)!r})"


def format_ffelem(x: FFElem, var: str = "t") -> str:
    """Canonical text form; the parser is a left inverse of this."""
    num = format_poly(x.num, var)
    if x.den.degree == 0:
        return num
    return f"({num})/({format_poly(x.den, var)})"


# ---------------------------------------------------------------------------
# Places
# ---------------------------------------------------------------------------


class Place:
    """A place of Q(t): a monic irreducible pi in Q[t], or infinity."""

    __slots__ = ("pi",)

    def __init__(self, pi: Poly = None, _skip_check: bool = False):
        """pi = None denotes the place at infinity."""
        if pi is not None:
            if pi.degree < 1:
                raise ValueError("a finite place needs a nonconstant polynomial")
            pi = pi.monic()
            if not _skip_check and not _is_irreducible(pi):
                raise ValueError(f"{format_poly(pi)} is reducible over Q")
        self.pi = pi

    @staticmethod
    def infinity() -> "Place":
        return Place(None)

    @staticmethod
    def at_t() -> "Place":
        return Place(Poly.t(), _skip_check=True)

    @property
    def is_infinite(self) -> bool:
        return self.pi is None

    @property
    def degree(self) -> int:
        return 1 if self.pi is None else self.pi.degree

    def uniformizer(self) -> FFElem:
        if self.pi is None:
            return FFElem.one() / FFElem.t()
        return FFElem(self.pi)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Place):
            return NotImplemented
        return self.pi == other.pi

    def __hash__(self) -> int:
        return hash(("Place", None if self.pi is None else self.pi.coeffs))

    def __repr__(self) -> str:
        if self.pi is None:
            return "Place(infinity)"
        return f"Place({format_poly(self.pi)})"


def _is_irreducible(p: Poly) -> bool:
    import sympy

    t = sympy.Symbol("t")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * t ** i
               for i, c in enumerate(p.coeffs))
    return sympy.Poly(expr, t, domain="QQ").is_irreducible


# ---------------------------------------------------------------------------
# Valuation and residue
# ---------------------------------------------------------------------------


def _poly_order(p: Poly, pi: Poly) -> int:
    """Multiplicity of pi in p (p nonzero)."""
    order = 0
    while True:
        q, r = p.divmod(pi)
        if not r.is_zero():
            return order
        order += 1
        p = q


def poly_valuation(p: Poly, place: Place):
    """Order of vanishing of a polynomial at the place; +inf for 0."""
    if p.is_zero():
        return INFINITY
    if place.is_infinite:
        return -p.degree
    return _poly_order(p, place.pi)


def valuation(x: FFElem, place: Place):
    """Order of vanishing of x at the place; +inf for x = 0."""
    if x.is_zero():
        return INFINITY
    if place.is_infinite:
        return x.den.degree - x.num.degree
    return _poly_order(x.num, place.pi) - _poly_order(x.den, place.pi)


class ResidueValue:
    """The image of an element under reduction at a place.

    Either a finite value in the residue field (a rational for degree-1
    places and infinity, otherwise a polynomial class mod pi) or the
    marker for the point at infinity of the residue projective line.
    """

    __slots__ = ("value", "at_infinity")

    def __init__(self, value=None, at_infinity: bool = False):
        if at_infinity:
            self.value = None
        else:
            self.value = value
        self.at_infinity = at_infinity

    @staticmethod
    def infinite() -> "ResidueValue":
        return ResidueValue(at_infinity=True)

    def as_fraction(self) -> Fraction:
        if self.at_infinity:
            raise ValueError("residue is the point at infinity")
        if isinstance(self.value, Poly):
            if self.value.degree > 0:
                raise ValueError("residue lies in a proper extension of Q")
            return Fraction(0) if self.value.is_zero() else self.value.coeffs[0]
        return self.value

    def __eq__(self, other) -> bool:
        if isinstance(other, ResidueValue):
            return (self.at_infinity == other.at_infinity
                    and self.value == other.value)
        if self.at_infinity:
            return False
        if isinstance(other, (int, Fraction)):
            try:
                return self.as_fraction() == Fraction(other)
            except ValueError:
                return False
        return NotImplemented

    def __hash__(self) -> int:
        if self.at_infinity:
            return hash(("ResidueValue", "inf"))
        v = self.value
        if isinstance(v, Poly):
            if v.degree <= 0:
                v = Fraction(0) if v.is_zero() else v.coeffs[0]
            else:
                return hash(("ResidueValue", v.coeffs))
        return hash(("ResidueValue", v))

    def __repr__(self) -> str:
        if self.at_infinity:
            return "ResidueValue(infinity)"
        if isinstance(self.value, Poly):
            return f"ResidueValue({format_poly(self.value)})"
        return f"ResidueValue({self.value})"


def _poly_inverse_mod(p: Poly, pi: Poly) -> Poly:
    """Inverse of p modulo pi (pi irreducible, p not divisible by pi)."""
    # extended Euclid on (pi, p)
    r0, r1 = pi, p % pi
    s0, s1 = Poly(), Poly.const(1)
    while not r1.is_zero():
        q, r2 = r0.divmod(r1)
        r0, r1 = r1, r2
        s0, s1 = s1, s0 - q * s1
    if r0.degree != 0:
        raise ZeroDivisionError("element not invertible modulo pi")
    return (s0.scale(1 / r0.coeffs[0])) % pi


def residue(x: FFElem, place: Place) -> ResidueValue:
    """Reduce x at the place; the infinity marker when v(x) < 0."""
    v = valuation(x, place)
    if v == INFINITY:
        return ResidueValue(Fraction(0))
    if v < 0:
        return ResidueValue.infinite()
    if place.is_infinite:
        if v > 0:
            return ResidueValue(Fraction(0))
        return ResidueValue(x.num.lead / x.den.lead)
    pi = place.pi
    num, den = x.num, x.den
    while (num % pi).is_zero() and (den % pi).is_zero():
        num = num // pi
        den = den // pi
    if (num % pi).is_zero():
        cls = Poly()
    else:
        cls = (num * _poly_inverse_mod(den, pi)) % pi
    if place.degree == 1:
        return ResidueValue(Fraction(0) if cls.is_zero() else cls.coeffs[0])
    return ResidueValue(cls)


# ---------------------------------------------------------------------------
# Factorization over Q[t] and the product formula
# ---------------------------------------------------------------------------


def factor_poly(p: Poly) -> tuple[Fraction, list[tuple[Poly, int]]]:
    """Factor p into monic irreducibles over Q.

    Returns (leading constant, [(pi, multiplicity), ...]).
    """
    import sympy

    if p.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    t = sympy.Symbol("t")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * t ** i
               for i, c in enumerate(p.coeffs))
    const, factors = sympy.factor_list(sympy.Poly(expr, t, domain="QQ"))
    lead = Fraction(const.p, const.q)
    out = []
    for fac, mult in factors:
        cs = fac.all_coeffs()[::-1]
        poly = Poly([Fraction(c.p, c.q) for c in
                     (sympy.Rational(c) for c in cs)])
        lc = poly.lead
        lead *= Fraction(lc.numerator, lc.denominator) ** mult
        out.append((poly.monic(), int(mult)))
    return lead, out


def finite_support(x: FFElem) -> list[tuple[Place, int]]:
    """All finite places where x has nonzero valuation, with the value."""
    if x.is_zero():
        raise ValueError("zero has no finite support")
    vals: dict = {}
    if x.num.degree > 0:
        for pi, mult in factor_poly(x.num)[1]:
            vals[pi.coeffs] = (pi, vals.get(pi.coeffs, (pi, 0))[1] + mult)
    if x.den.degree > 0:
        for pi, mult in factor_poly(x.den)[1]:
            vals[pi.coeffs] = (pi, vals.get(pi.coeffs, (pi, 0))[1] - mult)
    out = []
    for pi, v in vals.values():
        if v != 0:
            out.append((Place(pi, _skip_check=True), v))
    return out


def product_formula_check(x: FFElem) -> int:
    """Degree-weighted sum of all valuations of x; always 0 for x != 0."""
    if x.is_zero():
        raise ValueError("the product formula applies to nonzero elements")
    total = 0
    for place, v in finite_support(x):
        total += place.degree * v
    total += valuation(x, Place.infinity())
    return total


# ---------------------------------------------------------------------------
# Expression parser
# ---------------------------------------------------------------------------


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class _Parser:
    """Recursive-descent parser for the published grammar.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' nonneg-int)?
    base   := rational | variable | '(' expr ')'

    A single leading sign on an expression is accepted as a
    convenience.  `atoms` maps variable names to ring elements; the
    values must support field arithmetic with ints.
    """

    def __init__(self, text: str, atoms: dict, one):
        self.text = text
        self.pos = 0
        self.atoms = atoms
        self.one = one

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            raise ExprSyntaxError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def parse(self):
        value = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            raise ExprSyntaxError("unexpected trailing input", self.pos)
        return value

    def expr(self):
        sign = 1
        if self.peek() == "-":
            self.pos += 1
            sign = -1
        elif self.peek() == "+":
            self.pos += 1
        value = self.term()
        if sign < 0:
            value = -value
        while True:
            op = self.peek()
            if op == "+":
                self.pos += 1
                value = value + self.term()
            elif op == "-":
                self.pos += 1
                value = value - self.term()
            else:
                return value

    def term(self):
        value = self.factor()
        while True:
            op = self.peek()
            if op == "*":
                self.pos += 1
                value = value * self.factor()
            elif op == "/":
                self.pos += 1
                divisor = self.factor()
                try:
                    value = value / divisor
                except ZeroDivisionError:
                    raise ExprSyntaxError("division by zero", self.pos)
            else:
                return value

    def factor(self):
        value = self.base()
        if self.peek() == "^":
            self.pos += 1
            self.skip_ws()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if self.pos == start:
                raise ExprSyntaxError("expected a nonnegative integer exponent",
                                      self.pos)
            value = value ** int(self.text[start:self.pos])
        return value

    def base(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            value = self.expr()
            self.expect(")")
            return value
        if ch.isdigit():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            return self.one * int(self.text[start:self.pos])
        if ch.isalpha():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isalnum():
                self.pos += 1
            name = self.text[start:self.pos]
            if name not in self.atoms:
                raise ExprSyntaxError(f"unknown variable {name!r}", start)
            return self.atoms[name]
        raise ExprSyntaxError("expected a number, variable, or parenthesis",
                              self.pos)


def parse_expression(text: str, atoms: dict, one):
    return _Parser(text, atoms, one).parse()


def parse_ffelem(text: str) -> FFElem:
    """Parse an element of Q(t) from the published expression grammar."""
    return parse_expression(text, {"t": FFElem.t()}, FFElem.one())
