"""Tests for the degree-2 classifier, disk coding, and witnesses."""
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtdyn.maps import parse_map, sigma
from qtdyn.qt_arith import INFINITY, FFElem, Place, parse_ffelem
from qtdyn.quadratic import (
    IRRATIONAL_EXISTS,
    POTENTIAL_GOOD_REDUCTION,
    STRONGLY_POLYNOMIAL_LIKE,
    UNDETERMINED,
    MultiplierData,
    cantor_coding,
    classify,
    fixed_point_multipliers,
    irrational_witness,
    kiwi_subcase,
    mobius_conjugate,
    newton_valuations,
    tau_squared,
    unit_residues,
)

VT = Place.at_t()
T = FFElem.t()
ONE = FFElem.one()

SPL_MAP = parse_map("(z*(z - t))/t^3")
SQUARE = parse_map("z^2")
AR_MAP = parse_map("((z + 1)*(z - t))/(z + t)")
E1_MAP = parse_map("(z^2 - t^2)/z")


def ffe(s):
    return parse_ffelem(s)


class TestMultipliers:
    def test_polynomial_like_map(self):
        # [DERIVED] fixed points 0 and t + t^3, third multiplier 0 at infinity
        data = fixed_point_multipliers(SPL_MAP)
        expected = {ffe("-1/t^2"), ffe("1/t^2 + 2"), ffe("0")}
        assert data.exact is not None
        assert set(data.exact) == expected

    def test_square_map(self):
        # [TRIVIAL] multipliers {0, 2, 0}
        data = fixed_point_multipliers(SQUARE)
        assert sorted(data.exact, key=str) == sorted(
            [ffe("0"), ffe("0"), ffe("2")], key=str)
        assert data.s1 == ffe("2") and data.s3 == ffe("0")

    def test_normal_form_by_construction(self):
        # [PAPER] f = (z^2 + a*z)/(b*z + 1) has multiplier a at 0, b at infinity
        f = parse_map("(z^2 + t*z)/(t*z + 1)")
        data = fixed_point_multipliers(f)
        assert data.exact is not None
        assert T in data.exact
        gamma = (T + T - ffe("2")) / (T * T - ONE)
        assert sorted(data.exact, key=str) == sorted(
            [T, T, gamma], key=str)

    def test_relation_holds(self):
        for f in (SPL_MAP, SQUARE, AR_MAP, E1_MAP):
            data = fixed_point_multipliers(f)
            assert (data.s3 - data.s1 + ffe("2")).is_zero()

    def test_degree_check(self):
        with pytest.raises(ValueError):
            fixed_point_multipliers(parse_map("z^3"))


class TestNewtonValuations:
    def test_double_zero_root(self):
        # [TRIVIAL] x^3 - x^2 has roots 0, 0, 1
        vals = newton_valuations([ffe("0"), ffe("0"), ffe("-1"), ONE], VT)
        assert vals == [INFINITY, INFINITY, 0] or vals == [0, INFINITY, INFINITY]

    def test_single_slope(self):
        # [TRIVIAL] x^3 - t
        vals = newton_valuations([-T, ffe("0"), ffe("0"), ONE], VT)
        assert vals == [Fraction(1, 3)] * 3

    def test_explicit_roots(self):
        # [TRIVIAL] (x - 1/t^2)(x - 2)(x - t)
        cubic = MultiplierData.from_multipliers(
            ffe("1/t^2"), ffe("2"), T).cubic
        assert newton_valuations(cubic, VT) == [-2, 0, 1]


class TestKiwi:
    def test_case2_residue(self):
        # [TRIVIAL] residue 3 is not a rational root of unity
        m = MultiplierData.from_multipliers(
            ffe("3 + t"), ffe("1/3"), ffe("(4 + 3*t)/t"))
        assert kiwi_subcase(m, VT) == 2

    def test_case4_infinite_tau(self):
        # [DERIVED] (a^2-1)/(1-a*b) = (t^2-2t)/t^2, valuation -1
        a, b = ffe("-1 + t"), ffe("-1 - t")
        assert tau_squared(a, b, VT) == INFINITY
        gamma = (a + b - ffe("2")) / (a * b - ONE)
        m = MultiplierData.from_multipliers(a, b, gamma)
        assert kiwi_subcase(m, VT) == 4

    def test_case3_finite_tau(self):
        # [DERIVED] ratio (t^2-2t)/t = t-2, valuation 0, residue -2
        a, b = ffe("-1 + t"), ffe("-1")
        assert tau_squared(a, b, VT) == Fraction(-2)
        gamma = (a + b - ffe("2")) / (a * b - ONE)
        m = MultiplierData.from_multipliers(a, b, gamma)
        assert kiwi_subcase(m, VT) == 3

    def test_undetermined_irrational_residues(self):
        # (x^2 - 2)(x - 1/t): unit roots +-sqrt(2) have irrational residues
        cubic = [ffe("2/t"), ffe("-2"), ffe("-1/t"), ONE]
        assert unit_residues(cubic, VT) is None
        m = MultiplierData(ffe("1/t"), ffe("-2"), ffe("-2/t"), None)
        assert kiwi_subcase(m, VT) == UNDETERMINED

    def test_tau_undefined(self):
        with pytest.raises(ValueError):
            tau_squared(ffe("2"), ffe("1/2"), VT)

    def test_precondition(self):
        with pytest.raises(ValueError):
            kiwi_subcase(MultiplierData.from_multipliers(
                ffe("0"), ffe("2"), ffe("0")), VT)


class TestClassify:
    def test_anchors(self):
        # [PAPER] the three anchor classifications
        assert classify(E1_MAP, VT).kind == POTENTIAL_GOOD_REDUCTION
        assert classify(SPL_MAP, VT).kind == STRONGLY_POLYNOMIAL_LIKE
        got = classify(AR_MAP, VT)
        assert got.kind == IRRATIONAL_EXISTS and got.kiwi_case == 2

    def test_square_good_reduction(self):
        assert classify(SQUARE, VT).kind == POTENTIAL_GOOD_REDUCTION

    def test_case1_unequal_negatives(self):
        # multipliers 1/t, 1/t^2: attracting third, unequal repelling pair
        a, b = ffe("1/t"), ffe("1/t^2")
        # realize via the normal form (z^2 + a*z)/(b*z + 1)
        f = parse_map("(z^2 + z/t)/(z/t^2 + 1)")
        got = classify(f, VT)
        assert got.kind == IRRATIONAL_EXISTS and got.kiwi_case == 1

    def test_conjugation_invariance(self):
        rng = random.Random(7)
        for f, expected in [(E1_MAP, classify(E1_MAP, VT)),
                            (SPL_MAP, classify(SPL_MAP, VT)),
                            (AR_MAP, classify(AR_MAP, VT))]:
            for _ in range(5):
                while True:
                    a, b, c, d = (rng.randint(-5, 5) for _ in range(4))
                    if a * d - b * c != 0:
                        break
                g = mobius_conjugate(f, a, b, c, d)
                assert classify(g, VT) == expected

    def test_json_shape(self):
        assert classify(AR_MAP, VT).to_json() == \
            {"class": IRRATIONAL_EXISTS, "kiwi_case": 2}
        assert classify(SQUARE, VT).to_json() == \
            {"class": POTENTIAL_GOOD_REDUCTION}


class TestCantorCoding:
    def test_oracles(self):
        # [DERIVED]/[PAPER] disk values for (u, p) = (t,2), (t,t), (t,1+t)
        c = cantor_coding(T, ffe("2"))
        assert (c.sigma0, c.sigma1, c.equal) == (1, 1, True)
        c = cantor_coding(T, T)
        assert (c.sigma0, c.sigma1, c.equal) == (2, 1, False)
        c = cantor_coding(T, ffe("1 + t"))
        assert (c.sigma0, c.sigma1, c.equal) == (1, 2, False)

    def test_direct_sigma_matches(self):
        for p_text in ("2", "t", "1 + t", "3 + t^2", "t^2"):
            c = cantor_coding(T, ffe(p_text))
            assert sigma(c.pair, FFElem.zero(), VT) == c.sigma0
            assert sigma(c.pair, ONE, VT) == c.sigma1

    def test_normal_form_checks(self):
        with pytest.raises(ValueError):
            cantor_coding(ONE, ffe("2"))        # v(u) = 0
        with pytest.raises(ValueError):
            cantor_coding(T, ffe("1/t"))        # pole parameter not integral
        with pytest.raises(ValueError):
            cantor_coding(T, ONE)               # pole at the disk center

    @given(k=st.integers(1, 3), cnum=st.integers(-9, 9),
           c0=st.integers(-4, 4), c1=st.integers(-4, 4))
    @settings(max_examples=50, deadline=None)
    def test_criterion_vs_direct(self, k, cnum, c0, c1):
        u = T ** k
        p = ffe(f"({c0}) + ({c1})*t") + FFElem.from_rational(
            Fraction(cnum, 7))
        if p.is_zero() or (p - ONE).is_zero():
            return
        c = cantor_coding(u, p)
        assert c.equal == (c.sigma0 == c.sigma1)
        assert sigma(c.pair, FFElem.zero(), VT) == c.sigma0
        assert sigma(c.pair, ONE, VT) == c.sigma1


def thue_morse(n):
    return [bin(i).count("1") % 2 for i in range(n)]


class TestIrrationalWitness:
    def test_constant_itineraries(self):
        # [TRIVIAL] fixed-point itineraries give constant digits
        _, digits = irrational_witness(T, T, [1] * 6)
        assert digits == [1] * 6
        _, digits = irrational_witness(T, T, [0] * 6)
        assert digits == [2] * 6

    def test_thue_morse(self):
        # [DERIVED] digits re-verified by direct evaluation
        bits = thue_morse(10)
        _, digits = irrational_witness(T, T, bits)
        expected = [2 if b == 0 else 1 for b in bits]
        assert digits == expected
        # no eventually-periodic digit stream with small data matches
        for pre in range(3):
            for per in range(1, 4):
                tail = digits[pre:]
                assert any(tail[i] != tail[i % per]
                           for i in range(len(tail))), (pre, per)

    def test_equal_disks_rejected(self):
        with pytest.raises(ValueError):
            irrational_witness(T, ffe("2"), [0, 1])

    def test_bad_bits(self):
        with pytest.raises(ValueError):
            irrational_witness(T, T, [0, 2])
