"""Interval-spine families and realization of 0/1 order itineraries.

The family f(z) = g(z) * (z - t)/(z + t), for g over Q of degree d - 1
fixing infinity with 0 of infinite g-orbit, has spine [zeta0, zeta1]
with zeta1 = D(0, |t|): the order function equals v(a) clamped to
[0, 1].  Any 0/1 digit sequence is realized by a point built through
backward Newton lifting, steering each preimage either into the disk
v >= 1 (digit 1) or into a unit-disk direction along the backward
orbit of 0 under the reduction map (digit 0).  Targeting a rational
alpha in [-1, 0] as a local height is the special case where the bits
are the binary digits of -alpha.

Realization is implemented for d = 2 (degree-1 g), where the residue
bookkeeping is exact; higher-degree families are constructed but not
realized here.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from qtdyn.heights import Enclosure
from qtdyn.maps import HPoly, HomogPair, parse_map
from qtdyn.puiseux import (
    PuiseuxApprox,
    ffelem_to_puiseux,
    newton_lift,
    p_add,
    p_div,
    p_mul,
    pval,
)
from qtdyn.qt_arith import INFINITY, FFElem

__all__ = [
    "DiskChain",
    "build_family",
    "family_parameters",
    "realize_itinerary",
    "target_alpha",
    "binary_digits",
]

ORBIT_CHECK_BOUND = 10 ** 4
_ESCAPE_BITS = 256


def _hpoly_mul(a: HPoly, b: HPoly) -> HPoly:
    out = [FFElem.zero()] * (a.d + b.d + 1)
    for i, ca in enumerate(a.coeffs):
        if ca.is_zero():
            continue
        for j, cb in enumerate(b.coeffs):
            if not cb.is_zero():
                out[i + j] = out[i + j] + ca * cb
    return HPoly(out)


def _is_constant(x: FFElem) -> bool:
    return x.num.degree <= 0 and x.den.degree <= 0


def _const_value(x: FFElem) -> Fraction:
    n = x.num.coeffs[0] if x.num.coeffs else Fraction(0)
    d = x.den.coeffs[0] if x.den.coeffs else Fraction(1)
    return Fraction(n) / Fraction(d)


def _infinite_orbit_of_zero(g: HomogPair) -> bool:
    """Semi-decision: iterate 0 with cycle detection; values whose
    integers outgrow the escape threshold are declared wandering."""
    pc = [_const_value(c) for c in g.P.coeffs]
    qc = [_const_value(c) for c in g.Q.coeffs]
    x = Fraction(0)
    seen = {x}
    for _ in range(ORBIT_CHECK_BOUND):
        num = den = Fraction(0)
        for p, q in zip(reversed(pc), reversed(qc)):
            num = num * x + p
            den = den * x + q
        if den == 0:
            return False                    # infinity is fixed: preperiodic
        x = num / den
        if x in seen:
            return False
        if max(abs(x.numerator).bit_length(),
               x.denominator.bit_length()) > _ESCAPE_BITS:
            return True
        seen.add(x)
    return True


def build_family(g) -> HomogPair:
    """The map g(z) * (z - t)/(z + t) from a rational g over Q that
    fixes infinity and gives 0 an infinite orbit."""
    if isinstance(g, str):
        g = parse_map(g)
    for c in list(g.P.coeffs) + list(g.Q.coeffs):
        if not _is_constant(c):
            raise ValueError("the factor g must be defined over Q")
    if not g.Q.coeffs[g.d].is_zero() or g.P.coeffs[g.d].is_zero():
        raise ValueError("g must fix infinity")
    if not _infinite_orbit_of_zero(g):
        raise ValueError("0 must have an infinite orbit under g")
    t = FFElem.t()
    zero_factor = HPoly([-t, FFElem.one()])     # z - t*w
    pole_factor = HPoly([t, FFElem.one()])      # z + t*w
    return HomogPair(_hpoly_mul(g.P, zero_factor),
                     _hpoly_mul(g.Q, pole_factor))


def family_parameters(f: HomogPair):
    """Recover (a, b) with g(z) = a*z + b from a degree-2 family map;
    rejects maps not of the shape (a*z + b)(z - t) / (z + t)."""
    if f.d != 2:
        raise ValueError("itinerary realization is implemented for d = 2")
    a = f.P.coeffs[2]
    t = FFElem.t()
    b = -f.P.coeffs[0] / t
    expected = build_family_from_linear(a, b)
    if not (_pair_equal(expected, f)):
        raise ValueError("not a map of the form (a*z + b)(z - t)/(z + t)")
    return a, b


def build_family_from_linear(a: FFElem, b: FFElem) -> HomogPair:
    t = FFElem.t()
    g = HomogPair(HPoly([b, a]), HPoly([FFElem.one(), FFElem.zero()]))
    return HomogPair(_hpoly_mul(g.P, HPoly([-t, FFElem.one()])),
                     _hpoly_mul(g.Q, HPoly([t, FFElem.one()])))


def _pair_equal(x: HomogPair, y: HomogPair) -> bool:
    return x.P.coeffs == y.P.coeffs and x.Q.coeffs == y.Q.coeffs


@dataclass(frozen=True)
class DiskChain:
    """Nested-region certificate of a realized digit prefix: for each
    step the region center (the realized point) and the valuation of
    the region radius, which increases by at least one at every
    digit-1 step."""

    centers: tuple
    radius_valuations: tuple
    digits: tuple
    g_params: tuple


def _residue_of(x: PuiseuxApprox):
    """Residue at t = 0 of a series with pval >= 0; 0 when pval > 0."""
    v = pval(x)
    if v == INFINITY or v > 0:
        return 0
    return complex(x.coefficient(Fraction(0)))


def realize_itinerary(f: HomogPair, bits: Sequence[int],
                      cutoff=None):
    """A point whose first N order digits equal the prescribed bits,
    with the digits re-verified by direct series evaluation.

    Backward-orbit directions are pinned deterministically by the
    reduction map g: the digit-0 residues follow the unique backward
    g-orbit of 0, and the trailing all-zero run rides the forward
    orbit of the escape point x = 1.
    """
    a_c, b_c = family_parameters(f)
    bits = [int(x) for x in bits]
    if any(x not in (0, 1) for x in bits):
        raise ValueError("the itinerary must be a 0/1 sequence")
    n = len(bits)
    if n == 0:
        raise ValueError("empty itinerary")
    cutoff = Fraction(cutoff) if cutoff is not None else Fraction(n + 6)
    a_q = complex(Fraction(a_c.num.coeffs[0], a_c.den.coeffs[0]))
    b_q = complex(Fraction(b_c.num.coeffs[0], b_c.den.coeffs[0]))

    if all(x == 0 for x in bits):
        # the escape point itself realizes the zero itinerary
        point = PuiseuxApprox.const(1, cutoff)
        return _finish(f, point, bits, (a_q, b_q))

    last_one = max(i for i, x in enumerate(bits) if x == 1)
    if last_one == n - 1:
        target = PuiseuxApprox.zero(cutoff)
    else:
        # start the trailing zero run at f(1): residue 2 under g = z+1,
        # and in general a point with sigma-free forward orbit
        f1 = f.apply(FFElem.one())
        target = ffelem_to_puiseux(f1, cutoff)

    for i in range(last_one, -1, -1):
        rho = _residue_of(target)
        if bits[i] == 1:
            if abs(rho - b_q) < 1e-9:
                raise ValueError("target residue hits the bad direction")
            z0 = (b_q + rho) / (b_q - rho)
            seed = PuiseuxApprox([(Fraction(1), z0)], cutoff)
        else:
            seed = PuiseuxApprox.const((rho - b_q) / a_q, cutoff)
        target = newton_lift(f, target, seed)
    return _finish(f, target, bits, (a_q, b_q))


def _finish(f, point, bits, g_params):
    digits = orbit_digits(f, point, len(bits))
    rv = []
    r = Fraction(1)
    for b in bits:
        rv.append(r)
        if b == 1:
            r += 1
    chain = DiskChain(tuple(point for _ in bits), tuple(rv),
                      tuple(digits), g_params)
    return chain, point


def orbit_digits(pair: HomogPair, x: PuiseuxApprox, n: int) -> list:
    """Order digits along the series orbit of x, evaluated directly;
    valid for points with pval >= 0 and pairs with min coefficient
    valuation 0 at t."""
    pc = [ffelem_to_puiseux(c, x.cutoff, x.tol) for c in pair.P.coeffs]
    qc = [ffelem_to_puiseux(c, x.cutoff, x.tol) for c in pair.Q.coeffs]
    digits = []
    for _ in range(n):
        pe = _horner(pc, x)
        qe = _horner(qc, x)
        v = min(pval(pe), pval(qe))
        digits.append(v if v != INFINITY else INFINITY)
        x = p_div(pe, qe)
    return digits


def _horner(coeffs, x):
    acc = PuiseuxApprox.zero(x.cutoff, x.tol)
    for c in reversed(coeffs):
        acc = p_add(p_mul(acc, x), c)
    return acc


def binary_digits(y: Fraction, n: int) -> list:
    """First n digits c_k of y = sum c_k 2^(-k) with c_k in {0,1},
    for 0 <= y <= 2 (greedy expansion; y = 2 gives all ones)."""
    y = Fraction(y)
    if not 0 <= y <= 2:
        raise ValueError("expansion defined on [0, 2]")
    if y == 2:
        return [1] * n
    out = []
    rem = y
    for _ in range(n):
        c = 1 if rem >= 1 else 0
        out.append(c)
        rem = 2 * (rem - c)
    return out


def target_alpha(alpha, depth: int, f: Optional[HomogPair] = None):
    """A point of the interval family whose local height at t encloses
    alpha in [-1, 0] to width 2^(-depth): the bits driving the
    itinerary are the binary digits of -alpha."""
    alpha = Fraction(alpha)
    if not -1 <= alpha <= 0:
        raise ValueError("alpha must lie in [-1, 0]")
    if f is None:
        f = build_family("z + 1")
    bits = binary_digits(-2 * alpha, depth)
    chain, point = realize_itinerary(f, bits)
    partial = Fraction(0)
    for k, c in enumerate(bits):
        partial += Fraction(c, 2 ** (k + 1))
    enclosure = Enclosure(-partial - Fraction(1, 2 ** depth), -partial)
    return chain, point, enclosure
