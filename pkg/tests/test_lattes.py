"""Tests for the Legendre-family map and its tent-map dynamics."""
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtdyn.heights import local_height
from qtdyn.lattes import (
    EXITED_ABOVE,
    EXITED_BELOW,
    TentState,
    lattes_local_height,
    lattes_pair,
    tent_map,
    tent_orbit,
    tent_orbit_table,
    tent_sigma,
    tent_step,
)
from qtdyn.maps import INF_POINT, digit_sequence
from qtdyn.qt_arith import FFElem, Place, parse_ffelem, valuation

VT = Place.at_t()
T = FFElem.t()


class TestTentSigma:
    def test_values(self):
        # [PAPER] digit table: 0 below the spine, 2r on it, 2 beyond
        assert tent_sigma(Fraction(-2)) == 0
        assert tent_sigma(0) == 0
        assert tent_sigma(Fraction(1, 3)) == Fraction(2, 3)
        assert tent_sigma(Fraction(2, 3)) == Fraction(4, 3)
        assert tent_sigma(1) == 2
        assert tent_sigma(5) == 2
        assert tent_sigma(float("inf")) == 2

    def test_matches_direct_sigma(self):
        # [DERIVED] digit of the pair itself at sample valuations
        from qtdyn.maps import sigma

        pair = lattes_pair()
        for a, expected in [(T, 2), (T * T, 2), (FFElem.one(), 0),
                            (FFElem.one() / T, 0), (parse_ffelem("2"), 0)]:
            assert sigma(pair, a, VT) == expected
            assert tent_sigma(valuation(a, VT)) == expected


class TestTentStep:
    def test_interior_slopes(self):
        s, digit = tent_step(TentState(Fraction(1, 3)))
        assert s.r == Fraction(2, 3) and digit == Fraction(2, 3)
        s, digit = tent_step(TentState(Fraction(2, 3)))
        assert s.r == Fraction(2, 3) and digit == Fraction(4, 3)

    def test_branch_at_zero(self):
        s, digit = tent_step(TentState(0), residue_value=Fraction(5))
        assert s.r == 0 and digit == 0 and s.branch_flags == ((0, False),)
        s, _ = tent_step(TentState(0), residue_value=Fraction(1))
        assert s.r == EXITED_BELOW

    def test_branch_at_half(self):
        s, digit = tent_step(TentState(Fraction(1, 2)), residue_value=3)
        assert s.r == Fraction(1) and digit == 1
        s, _ = tent_step(TentState(Fraction(1, 2)), residue_value=-1)
        assert s.r == EXITED_ABOVE

    def test_branch_at_one(self):
        s, digit = tent_step(TentState(1), residue_value=Fraction(7))
        assert s.r == 0 and digit == 2
        s, _ = tent_step(TentState(1), residue_value=1)
        assert s.r == EXITED_BELOW

    def test_exit_states(self):
        s, digit = tent_step(TentState(EXITED_ABOVE))
        assert digit == 2 and s.r == EXITED_BELOW
        s, digit = tent_step(TentState(EXITED_BELOW))
        assert digit == 0 and s.r == EXITED_BELOW

    def test_missing_residue(self):
        with pytest.raises(ValueError):
            tent_step(TentState(0))
        with pytest.raises(ValueError):
            tent_step(TentState(Fraction(1, 2)))

    def test_radius_range(self):
        with pytest.raises(ValueError):
            TentState(Fraction(3, 2))


class TestTentOrbit:
    def test_oracles(self):
        # [DERIVED] exact tent iteration
        assert tent_orbit(Fraction(2, 3)) == (0, 1)
        assert tent_orbit(Fraction(1, 3)) == (1, 1)
        assert tent_orbit(Fraction(1, 5)) == (1, 2)
        assert tent_orbit(0) == (0, 1)
        assert tent_orbit(1) == (1, 1)
        assert tent_orbit(Fraction(1, 2)) == (2, 1)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            tent_orbit(Fraction(3, 2))

    def test_table_matches_single_orbits(self):
        for q in (1, 2, 3, 5, 12, 37, 50):
            table = tent_orbit_table(q)
            assert len(table) == q + 1
            for p in range(q + 1):
                assert table[p] == tent_orbit(Fraction(p, q)), (p, q)

    def test_periods_positive(self):
        for q in (7, 100, 257):
            for pre, per in tent_orbit_table(q):
                assert per >= 1 and pre >= 0

    @given(r=st.fractions(min_value=0, max_value=1, max_denominator=64))
    @settings(max_examples=60, deadline=None)
    def test_denominator_never_increases(self, r):
        assert tent_map(r).denominator <= max(r.denominator, 2)
        pre, per = tent_orbit(r)
        assert per >= 1


class TestLattesHeight:
    def test_oracles(self):
        # [DERIVED] digit streams 2,0,0,... / all 0 / all 0 with pole
        for a, expected in [(T, Fraction(-1, 2)),
                            (FFElem.one(), Fraction(0)),
                            (FFElem.one() / T, Fraction(1)),
                            (FFElem.zero(), Fraction(-1, 2)),
                            (T * T, Fraction(-1, 2)),
                            (parse_ffelem("2"), Fraction(0))]:
            r = lattes_local_height(a)
            assert isinstance(r.value, Fraction)
            assert r.value == expected, a

    def test_digits_at_t(self):
        r = lattes_local_height(T)
        assert r.digits == [2]
        assert r.certificate.is_exact()

    def test_infinity_rejected(self):
        with pytest.raises(ValueError):
            lattes_local_height(INF_POINT)

    def test_agrees_with_generic_heights(self):
        for text in ("t", "1", "1/t", "0", "2", "t^2", "t + 1",
                     "1/(t + 1)", "5*t^3", "(t - 1)/t", "t/3 + 2"):
            a = parse_ffelem(text)
            assert lattes_local_height(a).value == \
                local_height(lattes_pair(), a, VT).value, text

    def test_digit_prefix_matches_direct_sigma(self):
        # the walk's digits are genuine sigma values along the orbit
        for text in ("t", "t^3", "0", "1/t^2", "3"):
            a = parse_ffelem(text)
            r = lattes_local_height(a)
            n = len(r.digits)
            if n:
                direct, _ = digit_sequence(lattes_pair(), a, VT, n)
                assert [Fraction(s) for s in direct] == r.digits

    @given(k=st.integers(-3, 3), c=st.integers(1, 9))
    @settings(max_examples=15, deadline=None)
    def test_random_points_match_generic(self, k, c):
        # points c * t^k sweep |v(a)| <= 3 with generic residues
        a = FFElem.from_rational(c) * T ** k if k >= 0 else \
            FFElem.from_rational(c) / T ** (-k)
        mine = lattes_local_height(a)
        assert isinstance(mine.value, Fraction)
        # the generic path may stop at an enclosure (its certificates
        # do not know the tent structure); it must still bracket the
        # exact value
        generic = local_height(lattes_pair(), a, VT).value
        if isinstance(generic, Fraction):
            assert mine.value == generic
        else:
            assert generic.contains(mine.value)
