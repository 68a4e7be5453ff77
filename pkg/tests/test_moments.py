from __future__ import annotations

import random
from fractions import Fraction as Fr

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from xtransform.moments import (ArithmeticModeError, ArityError, MomentSequence,
                                NonInvertibleSeriesError, exp_transform_sequence,
                                hankel_determinants, inverse_exp_transform, j_fraction,
                                l_sequence_check, parse_sequence, psd_margin, reciprocal_shift)


def seq(xs, exact=True):
    return MomentSequence(tuple(xs), exact=exact)


def hilbert(length):
    return seq(Fr(1, k + 1) for k in range(length))


rationals = st.fractions(min_value=-3, max_value=3, max_denominator=6)


class TestSequence:
    def test_parse_csv(self):
        s = parse_sequence("1, 1/2, 1/3")
        assert s.coeffs == (1, Fr(1, 2), Fr(1, 3)) and s.exact

    def test_parse_json_and_file(self, tmp_path):
        assert parse_sequence('[1, "1/4", 0.5]').coeffs == (1, Fr(1, 4), Fr(1, 2))
        path = tmp_path / "s.txt"
        path.write_text("2, 3")
        assert parse_sequence(str(path)).coeffs == (2, 3)

    def test_float_mode(self):
        s = parse_sequence("1, 1/3", exact=False)
        assert not s.exact and s[1] == pytest.approx(1 / 3)

    def test_no_silent_mixing(self):
        with pytest.raises(ArithmeticModeError):
            seq([1, 0.5])
        with pytest.raises(ArithmeticModeError):
            reciprocal_shift(seq([1, 2]), 0.5)

    def test_empty(self):
        with pytest.raises(ValueError):
            parse_sequence(" , ")


class TestExpTransform:
    def test_hilbert_to_unit(self):
        a = exp_transform_sequence(hilbert(15))
        assert a.coeffs == (1,) + (0,) * 14

    def test_single_mass(self):
        s0 = Fr(3, 2)
        a = exp_transform_sequence(seq([s0, 0, 0, 0, 0]))
        expected = [-(-s0) ** (k + 1) / sp.factorial(k + 1) for k in range(5)]
        assert list(a.coeffs) == [Fr(int(sp.numer(e)), int(sp.denom(e))) for e in expected]

    def test_zero(self):
        assert exp_transform_sequence(seq([0] * 6)).coeffs == (0,) * 6

    def test_against_sympy(self):
        s = [Fr(1), Fr(-2, 3), Fr(5, 7), Fr(1, 2)]
        u = sp.symbols("u")
        S = sum(sp.Rational(c.numerator, c.denominator) * u ** (k + 1) for k, c in enumerate(s))
        ser = sp.series(1 - sp.exp(-S), u, 0, len(s) + 1).removeO()
        expected = [ser.coeff(u, k + 1) for k in range(len(s))]
        got = exp_transform_sequence(seq(s)).coeffs
        assert [sp.Rational(g.numerator, g.denominator) for g in got] == expected

    @settings(max_examples=40, deadline=None)
    @given(st.lists(rationals, min_size=1, max_size=9))
    def test_round_trip(self, xs):
        s = seq(xs)
        assert inverse_exp_transform(exp_transform_sequence(s)) == s

    def test_float_mode_close_to_exact(self):
        s = hilbert(8)
        exact = exp_transform_sequence(s.scaled(Fr(1, 3)))
        approx = exp_transform_sequence(s.to_float().scaled(1 / 3))
        assert np.allclose([float(c) for c in exact], approx.coeffs, atol=1e-14)


class TestHankel:
    def test_unit(self):
        rep = hankel_determinants(seq([1, 0, 0, 0, 0]), 1)
        assert rep.determinants == [1, 0] and rep.psd == [True, True]

    def test_point_mass(self):
        rep = hankel_determinants(seq(Fr(1, 2 ** (k + 1)) for k in range(7)), 3)
        assert rep.determinants == [Fr(1, 2), 0, 0, 0] and rep.all_psd

    def test_hilbert_against_sympy(self):
        rep = hankel_determinants(hilbert(9), 4)
        for m, d in enumerate(rep.determinants):
            H = sp.Matrix(m + 1, m + 1, lambda i, j: sp.Rational(1, i + j + 1))
            assert sp.Rational(d.numerator, d.denominator) == H.det()
            assert d > 0
        assert rep.all_psd

    def test_indefinite_with_zero_minors(self):
        # leading minors 0, 0 but the form is not semidefinite
        rep = hankel_determinants(seq([0, 0, -1]), 1)
        assert rep.determinants == [0, 0]
        assert rep.psd == [True, False]
        assert psd_margin(seq([0, 0, -1]), 1) < 0

    def test_arity(self):
        with pytest.raises(ArityError):
            hankel_determinants(seq([1, 2, 3]), 2)

    def test_float_mode(self):
        rep = hankel_determinants(hilbert(9).to_float(), 4)
        assert not rep.exact and rep.all_psd
        assert rep.determinants[4] == pytest.approx(float(hankel_determinants(hilbert(9), 4).determinants[4]),
                                                    rel=1e-3)


class TestJFraction:
    def test_point_mass(self):
        jf = j_fraction(seq(Fr(1, 2 ** (k + 1)) for k in range(9)), 4)
        assert jf.alphas[0] == Fr(1, 2) and jf.betas[0] == Fr(-1, 2)
        assert jf.terminated and jf.depth == 1

    def test_unit(self):
        jf = j_fraction(seq([1, 0, 0, 0, 0]), 2)
        assert jf.alphas == [1, 0] and jf.betas == [0] and jf.terminated

    def test_hilbert_product_formula(self):
        a = hilbert(9)
        jf = j_fraction(a, 4)
        assert jf.depth == 4
        assert jf.determinant_products() == hankel_determinants(a, 4).determinants

    def test_round_trip(self):
        rng = random.Random(3)
        for _ in range(20):
            depth = rng.randint(1, 4)
            a = seq([Fr(rng.randint(1, 5), rng.randint(1, 4))] +
                    [Fr(rng.randint(-4, 4), rng.randint(1, 4)) for _ in range(2 * depth)])
            jf = j_fraction(a, depth)
            if jf.depth < depth:
                continue
            assert jf.expand(2 * depth + 1) == a
            assert jf.determinant_products() == hankel_determinants(a, depth).determinants

    def test_early_termination(self):
        jf = j_fraction(seq([1, 1, 1, 2, 5]), 2)  # det of the 2x2 Hankel block is 0
        assert jf.depth == 0 and "vanishing" in jf.reason


class TestShift:
    def test_identity(self):
        assert reciprocal_shift(hilbert(6), 0) == hilbert(6)

    def test_geometric(self):
        c = Fr(3, 2)
        b = reciprocal_shift(seq([1, 0, 0, 0, 0, 0]), c)
        assert b.coeffs == tuple((-c) ** k for k in range(6))

    def test_non_invertible(self):
        with pytest.raises(NonInvertibleSeriesError):
            reciprocal_shift(seq([0, 1, 2]), 1)

    def test_hilbert_shift(self):
        a = hilbert(11)
        b = reciprocal_shift(a, 3)
        assert hankel_determinants(a, 5).determinants == hankel_determinants(b, 5).determinants

    def test_random_instances(self):
        rng = random.Random(17)
        for _ in range(50):
            a0 = Fr(rng.choice([-1, 1]) * rng.randint(1, 5), rng.randint(1, 5))
            a = seq([a0] + [Fr(rng.randint(-6, 6), rng.randint(1, 5)) for _ in range(10)])
            c = Fr(rng.randint(-9, 9), rng.randint(1, 7))
            b = reciprocal_shift(a, c)
            ra, rb = hankel_determinants(a, 5), hankel_determinants(b, 5)
            assert ra.determinants == rb.determinants
            assert ra.psd == rb.psd

    def test_positivity_transport_psd(self):
        # moments of positive measures stay psd under the shift
        rng = np.random.default_rng(2)
        for _ in range(10):
            nodes = [Fr(int(v), 7) for v in rng.integers(-7, 8, 3)]
            masses = [Fr(int(v), 5) for v in rng.integers(1, 6, 3)]
            a = seq(sum(m * x**k for m, x in zip(masses, nodes)) for k in range(9))
            b = reciprocal_shift(a, Fr(int(rng.integers(-5, 6)), 3))
            assert hankel_determinants(a, 4).all_psd and hankel_determinants(b, 4).all_psd


class TestLSequence:
    def test_indicator_moments(self):
        rep = l_sequence_check(hilbert(11), 5)
        assert rep.sequence.coeffs == tuple(Fr(1, 2 ** (k + 1)) for k in range(11))
        assert rep.all_psd

    def test_zero(self):
        rep = l_sequence_check(seq([0] * 5), 2)
        assert rep.sequence.coeffs == (0,) * 5 and rep.all_psd

    def test_consistency_with_shift(self):
        rng = random.Random(5)
        for _ in range(10):
            s = seq(Fr(rng.randint(-5, 5), rng.randint(1, 5)) for _ in range(9))
            a = exp_transform_sequence(s)
            if a[0] == 0:
                continue
            # 1/b = 2/a - 1
            assert l_sequence_check(s, 4).sequence == reciprocal_shift(a.scaled(Fr(1, 2)), -1)

    def test_arity(self):
        with pytest.raises(ArityError):
            l_sequence_check(hilbert(4), 2)
