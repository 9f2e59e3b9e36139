"""Local and global canonical heights with certificates.

The local canonical height of an affine point a at a place v is

    lambda(a) = -eta(F, a) - min(0, v(a)),

where eta is the digit series (1/d) sum sigma_n / d^n along the orbit.
Since no general procedure decides eventual periodicity of the digit
sequence, results carry one of three certificates:

* ExactPreperiodic  -- the projective orbit repeats structurally, so
  the digits are eventually periodic and eta is an exact rational;
* ZeroTail          -- from some index on, every digit is 0, proved
  either by a fixed reduction direction that stays off the bad set
  (good-direction-absorption) or by an affine residue orbit that
  provably never meets the bad set (affine-residue-escape);
* EnclosureOnly     -- an interval [eta_N, eta_N + tail] whose width
  is the resultant tail bound.

Heights of good-reduction places are exact with no search needed.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional, Union

from qtdyn.maps import (
    INF_POINT,
    HomogPair,
    digit_sequence,
    eta_partial,
    format_point,
    naive_term,
    parse_map,
    point_coordinates,
    rational_from_periodic_digits,
    residue_coeff_lists,
    sigma_raw,
    tail_bound,
)
from qtdyn.qt_arith import (
    INFINITY,
    FFElem,
    Place,
    Poly,
    factor_poly,
    format_ffelem,
    valuation,
)

__all__ = [
    "Enclosure",
    "Certificate",
    "LocalHeightResult",
    "ResourceCapError",
    "eta_enclosure",
    "local_height",
    "rational_from_periodic_digits",
    "functional_equation_check",
    "scaling_shift",
    "global_height",
]


class ResourceCapError(RuntimeError):
    """Coefficient growth exceeded the configured cap."""


class Enclosure:
    """A closed rational interval [lo, hi]."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi:
            raise ValueError("empty enclosure")
        self.lo = lo
        self.hi = hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        if isinstance(x, Enclosure):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= Fraction(x) <= self.hi

    def __add__(self, other):
        if isinstance(other, Enclosure):
            return Enclosure(self.lo + other.lo, self.hi + other.hi)
        return Enclosure(self.lo + Fraction(other), self.hi + Fraction(other))

    __radd__ = __add__

    def __neg__(self):
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Enclosure)
                       else -Fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, k) -> "Enclosure":
        k = Fraction(k)
        if k >= 0:
            return Enclosure(self.lo * k, self.hi * k)
        return Enclosure(self.hi * k, self.lo * k)

    def __eq__(self, other):
        if not isinstance(other, Enclosure):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __repr__(self):
        return f"Enclosure({self.lo}, {self.hi})"


def as_interval(x) -> Enclosure:
    if isinstance(x, Enclosure):
        return x
    return Enclosure(x, x)


class Certificate:
    """Why a height value is exact (or why it is only an interval)."""

    EXACT_PREPERIODIC = "ExactPreperiodic"
    ZERO_TAIL = "ZeroTail"
    ENCLOSURE_ONLY = "EnclosureOnly"

    def __init__(self, kind: str, preperiod: int = None, period: int = None,
                 eta: Fraction = None, n0: int = None, reason: str = None):
        self.kind = kind
        self.preperiod = preperiod
        self.period = period
        self.eta = eta
        self.n0 = n0
        self.reason = reason

    def is_exact(self) -> bool:
        return self.kind != Certificate.ENCLOSURE_ONLY

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == Certificate.EXACT_PREPERIODIC:
            out["preperiod"] = self.preperiod
            out["period"] = self.period
            out["eta"] = _frac_str(self.eta)
        elif self.kind == Certificate.ZERO_TAIL:
            out["n0"] = self.n0
            out["reason"] = self.reason
        return out

    def __repr__(self):
        return f"Certificate({self.to_json()!r})"


def _frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


class LocalHeightResult:
    def __init__(self, value, certificate: Certificate, digits, place: Place,
                 normalization_exponent: int):
        self.value = value                  # Fraction or Enclosure
        self.certificate = certificate
        self.digits = digits
        self.place = place
        self.normalization_exponent = normalization_exponent

    def is_exact(self) -> bool:
        return isinstance(self.value, Fraction)

    def to_json(self) -> dict:
        if isinstance(self.value, Fraction):
            value = {"exact": _frac_str(self.value)}
        else:
            value = {"lo": _frac_str(self.value.lo),
                     "hi": _frac_str(self.value.hi)}
        return {
            "value": value,
            "certificate": self.certificate.to_json(),
            "digits": [int(s) for s in self.digits],
            "place": repr(self.place),
            "normalization_exponent": self.normalization_exponent,
        }

    def __repr__(self):
        return f"LocalHeightResult({self.to_json()!r})"


# ---------------------------------------------------------------------------
# Orbits with a degree cap
# ---------------------------------------------------------------------------


def _check_cap(a, cap: int):
    """Degrees are capped at `cap` and coefficient sizes at 8*cap bits;
    either can grow doubly exponentially along a wandering orbit."""
    if a is INF_POINT:
        return
    if a.num.degree > cap or a.den.degree > cap:
        raise ResourceCapError(
            f"orbit coefficient degree exceeded the cap of {cap}")
    bits = 8 * cap
    for poly in (a.num, a.den):
        for c in poly.coeffs:
            if (c.numerator.bit_length() > bits
                    or c.denominator.bit_length() > bits):
                raise ResourceCapError(
                    f"orbit coefficient size exceeded {bits} bits")


def _digits_orbit(norm: HomogPair, a, place: Place, n: int, cap: int):
    orbit = [a]
    digits = []
    for i in range(n):
        digits.append(sigma_raw(norm, orbit[-1], place))
        if i == n - 1:
            break                           # last digit needs no next point
        nxt = norm.apply(orbit[-1])
        _check_cap(nxt, cap)
        orbit.append(nxt)
    return digits, orbit


# ---------------------------------------------------------------------------
# Enclosures of eta
# ---------------------------------------------------------------------------


def eta_enclosure(pair: HomogPair, a, place: Place, depth: int,
                  cap: int = 128):
    """[eta_N, eta_N + tail] plus the digit prefix, N = depth."""
    norm = pair.normalized_at(place)
    digits, _ = _digits_orbit(norm, a, place, depth, cap)
    lo = eta_partial(digits, pair.d)
    return Enclosure(lo, lo + tail_bound(pair, place, depth)), digits


# ---------------------------------------------------------------------------
# Zero-tail machinery
# ---------------------------------------------------------------------------


def _direction(a, place: Place):
    """Reduction of the point: a Fraction, or "inf"."""
    from qtdyn.qt_arith import residue

    if a is INF_POINT:
        return "inf"
    v = valuation(a, place)
    if v < 0:
        return "inf"
    return residue(a, place).as_fraction()


def _reduced_forms(norm: HomogPair, place: Place):
    """Joint reduction as Fraction coefficient lists (length d+1)."""
    return residue_coeff_lists(norm, place)


def _eval_form(coeffs, delta):
    """Evaluate a homogeneous coefficient list at a direction."""
    d = len(coeffs) - 1
    if delta == "inf":
        return coeffs[d]
    x = Fraction(delta)
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _good_direction_certificate(norm, place, orbit, j):
    """sigma_n = 0 for n >= j when the direction of orbit[j] is a fixed
    point of the reduced pair and not a common root of it."""
    delta = _direction(orbit[j], place)
    pbar, qbar = _reduced_forms(norm, place)
    pv, qv = _eval_form(pbar, delta), _eval_form(qbar, delta)
    if pv == 0 and qv == 0:
        return False
    image = "inf" if qv == 0 else pv / qv
    return image == delta


def _affine_escape_certificate(norm, place, orbit, j):
    """sigma_n = 0 for n >= j when the reduced map is affine and the
    residue orbit provably avoids the common roots of the reduction."""
    delta = _direction(orbit[j], place)
    if delta == "inf":
        return False
    pbar, qbar = _reduced_forms(norm, place)
    p_poly, q_poly = Poly(pbar), Poly(qbar)
    if p_poly.is_zero() or q_poly.is_zero():
        return False
    g = p_poly.gcd(q_poly)
    num = p_poly // g
    den = q_poly // g
    if den.degree != 0 or num.degree != 1:
        return False                        # reduced map is not affine
    lam = num.coeffs[1] / den.coeffs[0]
    const = num.coeffs[0] / den.coeffs[0]
    # the direction orbit is r -> lam*r + const; it must avoid every
    # rational root of the common factor g, forever
    for b in _rational_roots(g):
        if _affine_orbit_hits(Fraction(delta), lam, const, b) is not None:
            return False
    return True


def _rational_roots(p: Poly):
    roots = []
    for pi, _ in factor_poly(p)[1]:
        if pi.degree == 1:
            roots.append(-pi.coeffs[0])
    return roots


def _affine_orbit_hits(r0: Fraction, lam: Fraction, c: Fraction,
                       b: Fraction) -> Optional[int]:
    """Least n >= 0 with lam^n r0 + (orbit form) = b, or None.

    The orbit is r_{n+1} = lam*r_n + c.  Decidable over Q: the lam = 1
    case is linear, lam = -1 is 2-periodic, and |lam| != 1 escapes
    monotonically after finitely many steps.
    """
    if lam == 1:
        if c == 0:
            return 0 if r0 == b else None
        n = (b - r0) / c
        if n.denominator == 1 and n >= 0:
            return int(n)
        return None
    fix = c / (1 - lam)
    if r0 == fix:
        return 0 if b == fix else None
    if b == fix:
        return None                         # the orbit never hits the fix
    ratio = (b - fix) / (r0 - fix)
    # solve lam^n = ratio
    if lam == -1:
        if ratio == 1:
            return 0
        if ratio == -1:
            return 1
        return None
    power = Fraction(1)
    n = 0
    growing = abs(lam) > 1
    while True:
        if power == ratio:
            return n
        if growing and abs(power) > abs(ratio):
            return None
        if not growing and abs(power) < abs(ratio):
            return None
        power *= lam
        n += 1
        if n > 10000:                       # unreachable safety stop
            raise RuntimeError("affine orbit search did not terminate")


# ---------------------------------------------------------------------------
# Local height
# ---------------------------------------------------------------------------


def local_height(f: Union[str, HomogPair], a, place: Place,
                 max_iter: int = 30, depth: Optional[int] = None,
                 cap: int = 32) -> LocalHeightResult:
    """Local canonical height with certificate search.

    Search order: exact projective orbit repetition, then zero-tail
    rules along the computed orbit prefix, else an enclosure from the
    digits obtained.  The point at infinity is rejected.

    Wandering orbits grow doubly exponentially, so the orbit walk
    stops once an iterate's degree exceeds `cap`.  By default the
    enclosure uses however many digits that allowed (at most 20); an
    explicit `depth` is a strict request and raises ResourceCapError
    when the cap prevents computing that many digits.
    """
    strict_depth = depth is not None
    if depth is None:
        depth = 20
    if a is INF_POINT:
        raise ValueError("the local height is computed for affine points")
    if isinstance(f, str):
        f = parse_map(f)
    if not isinstance(a, FFElem):
        a = FFElem.from_rational(a)
    norm = f.normalized_at(place)
    m = min(f.P.min_coeff_valuation(place), f.Q.min_coeff_valuation(place))
    d = f.d
    naive = Fraction(naive_term(a, place))

    def zero_tail(orbit, j):
        if _good_direction_certificate(norm, place, orbit, j):
            reason = "good-direction-absorption"
        elif _affine_escape_certificate(norm, place, orbit, j):
            reason = "affine-residue-escape"
        else:
            return None
        eta = eta_partial(digits[:j], d)
        cert = Certificate(Certificate.ZERO_TAIL, n0=j, reason=reason,
                           eta=eta)
        return LocalHeightResult(-eta + naive, cert, digits, place, m)

    # The certificate checks are interleaved with the orbit walk so a
    # wandering orbit is not iterated (expensively) past the point
    # where its tail is already certified.  Exact repetition is tested
    # first at each step so short cycles report as ExactPreperiodic.
    digits, orbit = [], [a]
    seen = {a: 0}
    capped = False
    try:
        for n in range(max_iter):
            digits.append(sigma_raw(norm, orbit[-1], place))
            nxt = norm.apply(orbit[-1])
            _check_cap(nxt, cap)
            orbit.append(nxt)
            if nxt in seen:
                j, k = seen[nxt], n + 1
                eta = rational_from_periodic_digits(digits[:k], j, k - j, d)
                cert = Certificate(Certificate.EXACT_PREPERIODIC,
                                   preperiod=j, period=k - j, eta=eta)
                return LocalHeightResult(-eta + naive, cert, digits,
                                         place, m)
            seen[nxt] = n + 1
            if digits[n] == 0:
                found = zero_tail(orbit, n)
                if found is not None:
                    return found
    except ResourceCapError:
        capped = True

    # Sweep any indices the inline checks did not reach: the final
    # point (which has no digit yet) and, when the cap interrupted a
    # step, the last point whose digit was computed.
    for j in range(len(orbit)):
        if j < len(digits) and digits[j] != 0:
            continue
        found = zero_tail(orbit, j)
        if found is not None:
            return found

    if capped and strict_depth and len(digits) < depth:
        raise ResourceCapError(
            f"no certificate found and the orbit degree cap of {cap} "
            f"allowed only {len(digits)} of {depth} digits")
    n_eff = min(depth, len(digits))
    lo = eta_partial(digits[:n_eff], d)
    enc = Enclosure(lo, lo + tail_bound(f, place, n_eff))
    cert = Certificate(Certificate.ENCLOSURE_ONLY)
    return LocalHeightResult((-enc) + naive, cert, digits[:n_eff], place, m)


# ---------------------------------------------------------------------------
# Laws
# ---------------------------------------------------------------------------


def scaling_shift(pair: HomogPair, s: FFElem, place: Place) -> Fraction:
    """Height shift caused by replacing (P, Q) with (sP, sQ)."""
    if s.is_zero():
        raise ValueError("scaling by zero is not allowed")
    return Fraction(-valuation(s, place), pair.d - 1)


def functional_equation_check(f: Union[str, HomogPair], a, place: Place,
                              **opts) -> Enclosure:
    """Enclosure of lambda(f(a)) - d*lambda(a) - v(Q(a)); contains 0.

    Preconditions: a and f(a) affine and Q(a, 1) != 0 (the last two
    coincide for normalized pairs).
    """
    if isinstance(f, str):
        f = parse_map(f)
    if a is INF_POINT:
        raise ValueError("a must be affine")
    if not isinstance(a, FFElem):
        a = FFElem.from_rational(a)
    norm = f.normalized_at(place)
    qa = norm.Q.eval(a, FFElem.one())
    if qa.is_zero():
        raise ValueError("f(a) is the point at infinity")
    fa = norm.apply(a)
    lam_a = as_interval(local_height(f, a, place, **opts).value)
    lam_fa = as_interval(local_height(f, fa, place, **opts).value)
    vq = valuation(qa, place)
    return lam_fa - lam_a.scale(f.d) - vq


# ---------------------------------------------------------------------------
# Global height
# ---------------------------------------------------------------------------


def relevant_places(pair: HomogPair, a: FFElem) -> list[Place]:
    """Places where a contribution is possible.

    These are the factors of the resultant, the poles of a, and every
    place in the support of a coefficient of the pair (at all other
    places the presentation is already normalized with good reduction,
    so the local height is exactly -min(0, v(a)) = 0).  The degree
    place at infinity is always included.
    """
    seen = {}
    polys = []
    res = pair.resultant()
    polys.extend([res.num, res.den, a.den])
    for form in (pair.P, pair.Q):
        for c in form.coeffs:
            if not c.is_zero():
                polys.extend([c.num, c.den])
    for poly in polys:
        if poly.degree < 1:
            continue
        for pi, _ in factor_poly(poly)[1]:
            seen[pi.coeffs] = Place(pi, _skip_check=True)
    places = sorted(seen.values(), key=lambda p: format_ffelem(
        FFElem(p.pi)))
    places.append(Place.infinity())
    return places


def global_height(f: Union[str, HomogPair], a, **opts):
    """Degree-weighted sum of local canonical heights over all places.

    Local values are computed from the per-place normalized pair; the
    normalization scalar pi^(-m) shifts the local height by m/(d-1),
    which is subtracted again so that every place refers to the one
    global presentation.  The product formula then makes the sum
    independent of that presentation, and preperiodic points get
    height exactly 0.

    Returns (value, per_place) where value is a Fraction when every
    place certifies, else an Enclosure; per_place maps each examined
    place to its LocalHeightResult or exact good-reduction value.
    """
    if isinstance(f, str):
        f = parse_map(f)
    if a is INF_POINT:
        raise ValueError("the global height is computed for affine points")
    if not isinstance(a, FFElem):
        a = FFElem.from_rational(a)
    total = Fraction(0)
    per_place = {}
    for place in relevant_places(f, a):
        norm = f.normalized_at(place)
        m = min(f.P.min_coeff_valuation(place),
                f.Q.min_coeff_valuation(place))
        shift = Fraction(m, f.d - 1)
        if valuation(norm.resultant(), place) == 0:
            # good reduction: sigma vanishes identically
            lam = Fraction(naive_term(a, place)) - shift
            per_place[place] = lam
        else:
            result = local_height(f, a, place, **opts)
            per_place[place] = result
            lam = result.value - shift
        if isinstance(lam, Enclosure):
            total = lam.scale(place.degree) + total
        else:
            total = total + lam * place.degree
    return total, per_place
