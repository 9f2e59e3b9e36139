"""The Legendre-family degree-4 map and its tent-map valuation dynamics.

The map f(z) = (z^2 - t)^2 / (4 z (z - 1) (z - t)) fixes infinity and
sends 0, 1, t there in one step.  At the place t (where v(t) = 1) the
valuation r = v(a) of an orbit point moves by the slope-2 tent map on
[0, 1], with residue conditions deciding the branches at r = 0, 1/2, 1,
and the digit sigma(F, a) equals 0 for r <= 0, 2r on [0, 1], and 2 for
r >= 1.  Rational r are preperiodic under the tent map, which makes
every local height here an exact rational.

Points of P^1(Q(t)) have integer valuations, so the exact-orbit walk
never meets the r = 1/2 branch and terminates quickly; the symbolic
TentState machine supports fractional radii for exploratory use.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from qtdyn.heights import Certificate, LocalHeightResult
from qtdyn.maps import (
    INF_POINT,
    HomogPair,
    eta_partial,
    naive_term,
    parse_map,
)
from qtdyn.qt_arith import INFINITY, FFElem, Place, residue, valuation

__all__ = [
    "LATTES_TEXT",
    "EXITED_ABOVE",
    "EXITED_BELOW",
    "TentState",
    "lattes_pair",
    "tent_sigma",
    "tent_map",
    "tent_step",
    "tent_orbit",
    "tent_orbit_table",
    "lattes_local_height",
]

LATTES_TEXT = "(z^2 - t)^2/(4*z*(z - 1)*(z - t))"

EXITED_BELOW = "exited-below"
EXITED_ABOVE = "exited-above"

_pair_cache: Optional[HomogPair] = None


def lattes_pair() -> HomogPair:
    global _pair_cache
    if _pair_cache is None:
        _pair_cache = parse_map(LATTES_TEXT)
    return _pair_cache


class TentState:
    """A radius on the spine, or one of the two absorbing exit states.

    `branch_flags` records every residue decision taken so far as
    (radius, residue-was-special) pairs, so symbolic runs can report
    what their output is conditional on.
    """

    __slots__ = ("r", "branch_flags")

    def __init__(self, r, branch_flags=()):
        if r not in (EXITED_BELOW, EXITED_ABOVE):
            r = Fraction(r)
            if not 0 <= r <= 1:
                raise ValueError("active tent radius must lie in [0, 1]")
        self.r = r
        self.branch_flags = tuple(branch_flags)

    @property
    def active(self) -> bool:
        return not isinstance(self.r, str)

    def __eq__(self, other):
        return isinstance(other, TentState) and self.r == other.r

    def __repr__(self):
        return f"TentState({self.r!r})"


def tent_sigma(r) -> Fraction:
    """The digit emitted at valuation r: 0 below the spine foot, 2r on
    it, 2 beyond the far end (v(0) = +infinity counts as beyond)."""
    if r == INFINITY:
        return Fraction(2)
    r = Fraction(r)
    if r <= 0:
        return Fraction(0)
    if r >= 1:
        return Fraction(2)
    return 2 * r


def tent_step(state: TentState, residue_value=None):
    """One step of the valuation dynamics: (next_state, emitted digit).

    The digit belongs to the *current* state.  At the three branching
    radii 0, 1/2 and 1 a residue must be supplied: the residue of a at
    r = 0, of a/t^(1/2) at r = 1/2, and of a/t at r = 1.  Exit states
    need no residue; exited-above emits one final digit 2 and falls
    below.
    """
    flags = state.branch_flags
    if state.r == EXITED_BELOW:
        return TentState(EXITED_BELOW, flags), Fraction(0)
    if state.r == EXITED_ABOVE:
        return TentState(EXITED_BELOW, flags), Fraction(2)
    r = state.r
    digit = tent_sigma(r)
    if r in (Fraction(0), Fraction(1, 2), Fraction(1)):
        if residue_value is None:
            raise ValueError(f"a residue is required at radius {r}")
        if r == 0:
            special = residue_value == 1
            nxt = EXITED_BELOW if special else Fraction(0)
        elif r == Fraction(1, 2):
            special = residue_value in (1, -1)
            nxt = EXITED_ABOVE if special else Fraction(1)
        else:
            special = residue_value == 1
            nxt = EXITED_BELOW if special else Fraction(0)
        return TentState(nxt, flags + ((r, special),)), digit
    nxt = 2 * r if r < Fraction(1, 2) else 2 - 2 * r
    return TentState(nxt, flags), digit


def tent_map(r: Fraction) -> Fraction:
    """Plain slope-2 tent map on [0, 1]."""
    r = Fraction(r)
    return 2 * r if 2 * r <= 1 else 2 - 2 * r


def tent_orbit(r0) -> tuple[int, int]:
    """(preperiod, period) of a rational in [0, 1] under the tent map.

    Denominators never increase, so exact repetition always occurs.
    """
    r = Fraction(r0)
    if not 0 <= r <= 1:
        raise ValueError("tent orbit is defined on [0, 1]")
    seen = {r: 0}
    n = 0
    while True:
        r = tent_map(r)
        n += 1
        if r in seen:
            return seen[r], n - seen[r]
        seen[r] = n


def tent_orbit_table(q: int) -> list[tuple[int, int]]:
    """(preperiod, period) of p/q under the tent map for p = 0..q.

    Works on the integer functional graph p -> min(2p, 2q - 2p) so a
    whole denominator class costs O(q) instead of O(q) per point.
    """
    if q < 1:
        raise ValueError("denominator must be positive")

    def step(p):
        return 2 * p if 2 * p <= q else 2 * q - 2 * p

    result: list = [None] * (q + 1)
    for start in range(q + 1):
        if result[start] is not None:
            continue
        path = []
        index = {}
        p = start
        while result[p] is None and p not in index:
            index[p] = len(path)
            path.append(p)
            p = step(p)
        if result[p] is not None:
            pre_known, period = result[p]
            tail_pre = pre_known
        else:
            cycle_start = index[p]
            period = len(path) - cycle_start
            for node in path[cycle_start:]:
                result[node] = (0, period)
            path = path[:cycle_start]
            tail_pre = 0
        for k, node in enumerate(reversed(path)):
            result[node] = (tail_pre + k + 1, period)
    return result


def _orbit_residue(x: FFElem, place: Place, r) -> Fraction:
    """Residue driving the branch at integer radius r (0 or 1)."""
    if r == 1:
        x = x / FFElem(place.pi)
    return residue(x, place).as_fraction()


def lattes_local_height(a, max_iter: int = 200) -> LocalHeightResult:
    """Exact local canonical height of the Legendre-family map at the
    place t, computed by walking the orbit through the tent dynamics
    with residues taken from the genuine orbit in Q(t).

    Always returns an exact rational: integer valuations either leave
    the spine (zero digits forever) or emit the single far-end digit 2
    first.  Agreement with the generic heights machinery is a tested
    invariant, not assumed.
    """
    if a is INF_POINT:
        raise ValueError("the local height is computed for affine points")
    if not isinstance(a, FFElem):
        a = FFElem.from_rational(a)
    place = Place.at_t()
    pair = lattes_pair()
    d = pair.d
    naive = Fraction(naive_term(a, place))

    digits: list[Fraction] = []
    flags = []
    x = a
    for _ in range(max_iter):
        if x is INF_POINT:
            break                           # infinity is fixed with digit 0
        r = valuation(x, place)
        if r != INFINITY and r <= 0:
            if r < 0:
                break                       # below the spine, absorbed
            res = _orbit_residue(x, place, 0)
            flags.append((Fraction(0), res == 1))
            if res != 1:
                # the orbit stays at radius 0 with digit 0; whether it
                # eventually exits below cannot change any digit
                break
            digits.append(Fraction(0))
            x = pair.apply(x)
            continue
        digits.append(tent_sigma(r))
        if r != INFINITY and r == 1:
            flags.append((Fraction(1), _orbit_residue(x, place, 1) == 1))
        x = pair.apply(x)
    else:
        raise RuntimeError("tent walk exceeded the iteration budget")

    eta = eta_partial(digits, d)
    value = -eta + naive
    cert = Certificate(Certificate.ZERO_TAIL, n0=len(digits),
                       reason="tent-exit", eta=eta)
    result = LocalHeightResult(value, cert, digits, place, 0)
    return result
