"""Tests for the orbit-intersection Diophantine solver."""
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtdyn.dioph import (
    IntersectionInstance,
    bounded_intersections,
    mult_independent,
    solve_equal,
)

F = Fraction


def brute(inst, box=25):
    out = []
    for m in range(box + 1):
        for n in range(box + 1):
            gap = inst.d ** m * inst.h1 - inst.e ** n * inst.h2
            if abs(gap) <= inst.c:
                out.append((m, n))
    return out


class TestMultIndependent:
    def test_oracles(self):
        # [TRIVIAL] (2,3); [TRIVIAL] 4^3 = 8^2; [DERIVED] vector check
        assert mult_independent(2, 3) == (True, None)
        assert mult_independent(4, 8) == (False, (3, 2))
        assert mult_independent(6, 12) == (True, None)

    def test_equal_degrees(self):
        assert mult_independent(5, 5) == (False, (1, 1))

    def test_prime_powers(self):
        assert mult_independent(9, 27) == (False, (3, 2))
        assert mult_independent(2, 1024) == (False, (10, 1))

    def test_precondition(self):
        with pytest.raises(ValueError):
            mult_independent(1, 3)

    @given(d=st.integers(2, 50), e=st.integers(2, 50))
    @settings(max_examples=60, deadline=None)
    def test_witness_is_genuine(self, d, e):
        independent, witness = mult_independent(d, e)
        if independent:
            # no coincidence in a small box
            for k in range(1, 9):
                for ell in range(1, 9):
                    assert d ** k != e ** ell
        else:
            k, ell = witness
            assert (k, ell) != (0, 0)
            assert d ** k == e ** ell


class TestSolveEqual:
    def test_trivial(self):
        # [TRIVIAL]
        r = solve_equal(1, 1, 2, 3)
        assert not r.dependent and r.solutions == ((0, 0),)

    def test_factor_match(self):
        # [DERIVED] 2*3 = 3*2
        r = solve_equal(3, 2, 2, 3)
        assert r.solutions == ((1, 1),)

    def test_dependent_family(self):
        # [DERIVED] 2^m = 4^n gives m = 2n
        r = solve_equal(1, 1, 2, 4)
        assert r.dependent and r.base == (0, 0) and r.step == (2, 1)
        assert r.witness == (2, 1)

    def test_dependent_empty(self):
        # 2^m = 3 * 4^n has no solution
        r = solve_equal(1, 3, 2, 4)
        assert r.dependent and r.solutions == ()

    def test_dependent_shifted_base(self):
        # 2^m = 8 * 4^n: base (3, 0), step (2, 1)
        r = solve_equal(1, 8, 2, 4)
        assert r.base == (3, 0) and r.step == (2, 1)

    def test_no_solution_foreign_prime(self):
        assert solve_equal(1, 7, 2, 3).solutions == ()

    def test_precondition(self):
        with pytest.raises(ValueError):
            solve_equal(0, 1, 2, 3)

    @given(m=st.integers(0, 10), n=st.integers(0, 10),
           d=st.integers(2, 9), e=st.integers(2, 9),
           hnum=st.integers(1, 9), hden=st.integers(1, 9))
    @settings(max_examples=80, deadline=None)
    def test_substitution(self, m, n, d, e, hnum, hden):
        # plant a solution and require the solver to recover one
        h1 = F(hnum, hden)
        h2 = h1 * F(d) ** m / F(e) ** n
        r = solve_equal(h1, h2, d, e)
        assert r.solutions
        for ms, ns in r.solutions:
            assert F(d) ** ms * h1 == F(e) ** ns * h2
        if not r.dependent:
            assert r.solutions == ((m, n),) or (
                # planted pair may reduce to a smaller equal pair only
                # when degrees are dependent, so here it is unique
                r.solutions[0] == (m, n))


class TestBoundedIntersections:
    def test_equality_only(self):
        # [TRIVIAL]
        inst = IntersectionInstance(1, 1, 2, 3, c=0)
        r = bounded_intersections(inst)
        assert r.solutions == ((0, 0),)
        assert r.attained == (F(0),)

    def test_small_bound(self):
        # [DERIVED] brute-force oracle
        inst = IntersectionInstance(1, 1, 2, 3, c=1)
        r = bounded_intersections(inst)
        assert set(r.solutions) == set(brute(inst))
        assert (0, 0) in r.solutions and (1, 0) in r.solutions
        assert all(m <= r.m_star and n <= r.n_star
                   for m, n in r.solutions)

    def test_fractional_bound(self):
        # [DERIVED] brute-force oracle over m, n <= 30
        inst = IntersectionInstance(5, 7, 3, 2, c=F(1, 2))
        r = bounded_intersections(inst)
        assert set(r.solutions) == set(brute(inst, box=30))

    def test_offset_matches(self):
        inst = IntersectionInstance(1, 1, 2, 3, c=2, q=1)
        r = bounded_intersections(inst)
        for m, n in r.offset_matches:
            assert F(2) ** m - F(3) ** n == 1
        assert (1, 0) in r.offset_matches and (2, 1) in r.offset_matches

    def test_dependent_rejected(self):
        with pytest.raises(ValueError):
            bounded_intersections(IntersectionInstance(1, 1, 2, 4, c=1))

    def test_attained_values_in_lattice(self):
        inst = IntersectionInstance(F(5, 6), F(7, 4), 2, 3, c=3)
        r = bounded_intersections(inst)
        for v in r.attained:
            assert abs(v) <= 3 and (v * 12).denominator == 1

    def test_random_instances_match_brute_force(self):
        # 100 random instances against the brute-force box m, n <= 25
        rng = random.Random(2026)
        for _ in range(100):
            while True:
                d, e = rng.randint(2, 12), rng.randint(2, 12)
                if mult_independent(d, e)[0]:
                    break
            inst = IntersectionInstance(
                F(rng.randint(1, 9), rng.randint(1, 9)),
                F(rng.randint(1, 9), rng.randint(1, 9)),
                d, e, c=F(rng.randint(0, 10)))
            r = bounded_intersections(inst)
            box = {(m, n) for m, n in brute(inst)}
            assert {s for s in r.solutions
                    if s[0] <= 25 and s[1] <= 25} == box
            for m, n in r.solutions:
                assert abs(inst.d ** m * inst.h1
                           - inst.e ** n * inst.h2) <= inst.c
