"""Orbit-intersection Diophantine solver.

Rational canonical heights turn an orbit-intersection question into
counting pairs (m, n) with |d^m * H1 - e^n * H2| <= C for integer
degrees d, e >= 2 and positive rational heights.  Since the gap lies
in (1/D) * Z for D = lcm of the height denominators, only finitely
many offset values q are attainable; the equality case q = 0 has at
most one solution when d and e are multiplicatively independent, and
each nonzero offset is eliminated beyond an explicit index by prime
valuations: d^m * A - e^n * B = k forces v_p(d^m * A) <= v_p(k) or
v_p(e^n * B) <= v_p(k) at every prime p.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import List, Optional, Tuple

from sympy import factorint

__all__ = [
    "IntersectionInstance",
    "EqualReport",
    "BoundedResult",
    "mult_independent",
    "solve_equal",
    "bounded_intersections",
]

HEURISTIC_HORIZON = 64
MAX_OFFSETS = 10 ** 6


@dataclass(frozen=True)
class IntersectionInstance:
    h1: Fraction
    h2: Fraction
    d: int
    e: int
    c: Fraction = Fraction(0)
    q: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "h1", Fraction(self.h1))
        object.__setattr__(self, "h2", Fraction(self.h2))
        object.__setattr__(self, "c", Fraction(self.c))
        object.__setattr__(self, "q", Fraction(self.q))
        if self.h1 <= 0 or self.h2 <= 0:
            raise ValueError("heights must be positive")
        if self.d < 2 or self.e < 2:
            raise ValueError("degrees must be at least 2")
        if self.c < 0:
            raise ValueError("the gap bound must be nonnegative")


def _exponent_vectors(d: int, e: int):
    fd = factorint(d)
    fe = factorint(e)
    primes = sorted(set(fd) | set(fe))
    a = [fd.get(p, 0) for p in primes]
    b = [fe.get(p, 0) for p in primes]
    return primes, a, b


def mult_independent(d: int, e: int):
    """Whether d^k = e^l has no solution besides k = l = 0, plus the
    minimal positive witness (k, l) when it does."""
    if d < 2 or e < 2:
        raise ValueError("degrees must be at least 2")
    _, a, b = _exponent_vectors(d, e)
    proportional = all(a[i] * b[j] == a[j] * b[i]
                       for i in range(len(a)) for j in range(i + 1, len(a)))
    if not proportional:
        return True, None
    i = next(i for i, x in enumerate(a) if x or b[i])
    g = gcd(a[i], b[i])
    k, ell = b[i] // g, a[i] // g
    assert d ** k == e ** ell
    return False, (k, ell)


@dataclass(frozen=True)
class EqualReport:
    """Solutions of d^m * H1 = e^n * H2 over m, n >= 0.

    Independent degrees give at most one solution.  Dependent degrees
    give either no solution or the arithmetic progression
    (m, n) = base + s * step, s >= 0, with step the minimal witness of
    the dependence."""

    dependent: bool
    solutions: Tuple[Tuple[int, int], ...]
    witness: Optional[Tuple[int, int]] = None
    base: Optional[Tuple[int, int]] = None
    step: Optional[Tuple[int, int]] = None


def _ratio_exponents(r: Fraction, primes):
    fn = factorint(r.numerator)
    fd = factorint(r.denominator)
    vec = []
    for p in primes:
        vec.append(fn.get(p, 0) - fd.get(p, 0))
    extra = (set(fn) | set(fd)) - set(primes)
    return vec, extra


def solve_equal(h1, h2, d: int, e: int) -> EqualReport:
    """All (m, n) >= 0 with d^m * h1 = e^n * h2, found by matching
    prime exponents of h2/h1 against those of d and e."""
    h1, h2 = Fraction(h1), Fraction(h2)
    if h1 <= 0 or h2 <= 0:
        raise ValueError("heights must be positive")
    primes, a, b = _exponent_vectors(d, e)
    r_vec, extra = _ratio_exponents(h2 / h1, primes)
    independent, witness = mult_independent(d, e)

    if independent:
        if extra:
            return EqualReport(False, ())
        # two unknowns: pick an invertible pair of prime equations
        # m*a_p - n*b_p = r_p; independence guarantees one exists
        pair = next(((i, j) for i in range(len(primes))
                     for j in range(i + 1, len(primes))
                     if a[i] * b[j] != a[j] * b[i]))
        i, j = pair
        det = -(a[i] * b[j] - a[j] * b[i])
        m = Fraction(-(r_vec[i] * b[j] - r_vec[j] * b[i]), det)
        n = Fraction(a[i] * r_vec[j] - a[j] * r_vec[i], det)
        if (m.denominator == 1 and n.denominator == 1
                and m >= 0 and n >= 0
                and d ** int(m) * h1 == e ** int(n) * h2):
            return EqualReport(False, ((int(m), int(n)),))
        return EqualReport(False, ())

    # dependent: a and b are parallel; write a = alpha*s, b = beta*s
    # for a primitive direction s, so the system collapses to a single
    # integer equation m*alpha - n*beta = mu
    g_a = 0
    for x in a:
        g_a = gcd(g_a, x)
    s = [x // g_a for x in a]
    alpha = g_a
    idx = next(i for i, x in enumerate(s) if x)
    beta = b[idx] // s[idx]
    if extra or any(b[i] != beta * s[i] for i in range(len(s))):
        return EqualReport(True, (), witness=witness)
    mus = {Fraction(r_vec[i], s[i]) for i in range(len(s)) if s[i]}
    if any(r_vec[i] != 0 for i in range(len(s)) if not s[i]) or len(mus) > 1:
        return EqualReport(True, (), witness=witness)
    mu = mus.pop()
    if mu.denominator != 1:
        return EqualReport(True, (), witness=witness)
    mu = int(mu)
    g = gcd(alpha, beta)
    if mu % g:
        return EqualReport(True, (), witness=witness)
    step = (beta // g, alpha // g)
    # base point: minimal s with both coordinates nonnegative
    m0, n0 = _solve_linear(alpha, beta, mu)
    if m0 is None:
        return EqualReport(True, (), witness=witness)
    assert d ** m0 * h1 == e ** n0 * h2
    return EqualReport(True, ((m0, n0),), witness=witness,
                       base=(m0, n0), step=step)


def _solve_linear(alpha: int, beta: int, mu: int):
    """Minimal nonnegative solution of m*alpha - n*beta = mu."""
    g = gcd(alpha, beta)
    x, y = _ext_gcd(alpha, beta)          # x*alpha + y*beta = g
    m = x * (mu // g)
    n = -y * (mu // g)
    sm, sn = beta // g, alpha // g
    # shift into the first quadrant along (sm, sn)
    k = max(-(m // sm) if m < 0 else 0, -(n // sn) if n < 0 else 0)
    m, n = m + k * sm, n + k * sn
    while m - sm >= 0 and n - sn >= 0:
        m, n = m - sm, n - sn
    if m < 0 or n < 0:
        return None, None
    return m, n


def _ext_gcd(a: int, b: int):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return x0, y0


@dataclass(frozen=True)
class BoundedResult:
    """Solutions of |d^m * H1 - e^n * H2| <= C with the scan bounds:
    no solution has m > m_star (proved by valuations when
    bound_proved, otherwise a documented heuristic horizon)."""

    solutions: Tuple[Tuple[int, int], ...]
    attained: Tuple[Fraction, ...]
    m_star: int
    n_star: int
    bound_proved: bool
    offset_matches: Tuple[Tuple[int, int], ...]


def _valuation(x: int, p: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _offset_m_bound(k: int, A: int, B: int, inst: IntersectionInstance):
    """An m beyond which d^m*A - e^n*B = k is impossible, or None.

    At every prime p at least one of v_p(d^m*A) <= v_p(k),
    v_p(e^n*B) <= v_p(k) must hold; shared primes of d and e bound m
    outright (a bounded n caps m through the archimedean window),
    and a prime of only one degree works unless the other side's
    constant already sits at v_p(k)."""
    d, e = inst.d, inst.e
    best = None
    for p in set(factorint(d)) | set(factorint(e)):
        vd, ve = _valuation(d, p), _valuation(e, p)
        vk, vA, vB = _valuation(k, p), _valuation(A, p), _valuation(B, p)
        if vd and ve:
            m_cap = max(0, (vk - vA) // vd) if vk >= vA else 0
            n_cap = max(0, (vk - vB) // ve) if vk >= vB else 0
            bound = max(m_cap, _m_from_n_cap(n_cap, inst))
        elif vd:
            if vB == vk:
                continue                     # cancellation possible
            bound = max(0, (vk - vA) // vd) if vk >= vA else 0
        else:
            if vA == vk:
                continue
            n_cap = max(0, (vk - vB) // ve) if vk >= vB else 0
            bound = _m_from_n_cap(n_cap, inst)
        best = bound if best is None else min(best, bound)
    return best


def _m_from_n_cap(n_cap: int, inst: IntersectionInstance) -> int:
    """Least M with d^M*H1 > e^n*H2 + C for all n <= n_cap."""
    ceiling = inst.e ** n_cap * inst.h2 + inst.c
    m, val = 0, inst.h1
    while val <= ceiling:
        val *= inst.d
        m += 1
    return m


def bounded_intersections(inst: IntersectionInstance) -> BoundedResult:
    """Exhaustive list of (m, n) with |d^m*H1 - e^n*H2| <= C.

    The gap lies in (1/D)Z for D = lcm of the height denominators, so
    the attainable offsets form a finite set; the zero offset is
    settled by solve_equal and each nonzero offset by prime-valuation
    bounds where they apply.  When some offset admits no valuation
    bound (coprime degrees with constants matching the offset
    p-adically) the scan horizon is heuristic and flagged as such.
    """
    independent, _ = mult_independent(inst.d, inst.e)
    if not independent:
        raise ValueError("degrees are multiplicatively dependent; "
                         "use solve_equal's family form")
    D = (inst.h1.denominator * inst.h2.denominator
         // gcd(inst.h1.denominator, inst.h2.denominator))
    A = int(inst.h1 * D)
    B = int(inst.h2 * D)
    k_max = int(inst.c * D)
    if k_max > MAX_OFFSETS:
        raise ValueError("gap bound admits too many offset values")

    proved = True
    m_star = 0
    for k in range(-k_max, k_max + 1):
        if k == 0:
            for m, _n in solve_equal(inst.h1, inst.h2, inst.d,
                                     inst.e).solutions:
                m_star = max(m_star, m)
        else:
            bound = _offset_m_bound(k, A, B, inst)
            if bound is None:
                proved = False
            else:
                m_star = max(m_star, bound)
    if not proved:
        m_star = max(m_star, HEURISTIC_HORIZON)

    solutions: List[Tuple[int, int]] = []
    attained = set()
    offset_matches = []
    n_star = 0
    for m in range(m_star + 1):
        target = inst.d ** m * inst.h1
        lo, hi = target - inst.c, target + inst.c
        n, val = 0, inst.h2
        while val < lo:
            val *= inst.e
            n += 1
        while val <= hi:
            gap = target - val
            solutions.append((m, n))
            attained.add(gap)
            if gap == inst.q:
                offset_matches.append((m, n))
            n_star = max(n_star, n)
            val *= inst.e
            n += 1
    return BoundedResult(tuple(solutions), tuple(sorted(attained)),
                         m_star, n_star, proved, tuple(offset_matches))
