import math
from fractions import Fraction

import numpy as np
import pytest

from dssyklab import moments as mo
from dssyklab import qhermite as qh
from dssyklab.qcore import MultiPoly
from dssyklab.qhermite import ConvergenceError, rt_moment


def poly(s_terms):
    return MultiPoly(s_terms)


THETA = MultiPoly.theta()
QT = MultiPoly.qt()
Q = MultiPoly.q()


class TestConditionalExpansion:
    def test_k0(self):
        e = mo.conditional_moment_expansion(0)
        assert e.coefficient(0) == MultiPoly.one()

    def test_k2(self):
        # qt H_2 + H_0 (qt exponent doubled internally: qt_pow 2 means qt^1)
        e = mo.conditional_moment_expansion(2)
        assert e.coefficient(2) == MultiPoly.monomial(qt_pow=2)
        assert e.coefficient(0) == MultiPoly.one()

    def test_k3_half_powers(self):
        e = mo.conditional_moment_expansion(3)
        assert e.coefficient(3) == MultiPoly.monomial(qt_pow=3)
        assert e.coefficient(1) == (2 + Q) * MultiPoly.monomial(qt_pow=1)


class TestReducedMoment:
    def test_m1(self):
        assert mo.reduced_moment(1) == THETA

    def test_m2(self):
        assert mo.reduced_moment(2) == THETA ** 2

    def test_m3(self):
        assert mo.reduced_moment(3) == THETA ** 3 + 3 * THETA

    def test_m4_printed(self):
        assert mo.reduced_moment(4) == THETA ** 4 + (4 + 2 * QT) * THETA ** 2

    def test_theta_parity(self):
        for n in range(1, 11):
            for (a, b, c), _ in mo.reduced_moment(n).items():
                assert c % 2 == n % 2

    def test_leading_theta_power(self):
        for n in range(1, 11):
            m = mo.reduced_moment(n)
            assert m.coefficient(theta_pow=n) == 1
            assert m.degree("theta") == n

    def test_vanishes_at_theta_zero(self):
        for n in range(1, 11):
            assert mo.reduced_moment(n).substitute(theta=0).is_zero()

    def test_qt_exponents_integral(self):
        # construction would raise if a half power survived; spot check values
        for n in range(1, 11):
            for (a, b, c), _ in mo.reduced_moment(n).items():
                assert b >= 0

    def test_order_cap(self):
        with pytest.raises(ValueError):
            mo.reduced_moment(15)
        with pytest.raises(ValueError):
            mo.reduced_moment(0)


class TestGeneratingFunctionRoute:
    def test_identical_polynomials(self):
        for n in range(1, 11):
            assert mo.reduced_moment_gf(n) == mo.reduced_moment(n)

    def test_identity_at_order_cap(self):
        assert mo.reduced_moment_gf(14) == mo.reduced_moment(14)

    def test_m1_is_theta(self):
        assert mo.reduced_moment_gf(1) == THETA


class TestFullMoment:
    def test_n2(self):
        r = Fraction(1, 3)
        assert mo.full_moment(2, r) == MultiPoly.one() + r * THETA ** 2

    def test_n1(self):
        assert mo.full_moment(1, Fraction(1, 2)) == Fraction(1, 2) * THETA

    def test_n4(self):
        r = Fraction(1, 4)
        expected = rt_moment(2) + r * (THETA ** 4 + (4 + 2 * QT) * THETA ** 2)
        assert mo.full_moment(4, r) == expected

    def test_r_domain(self):
        with pytest.raises(ValueError):
            mo.full_moment(2, 0)
        with pytest.raises(ValueError):
            mo.full_moment(2, Fraction(3, 2))


class TestBooleanOracle:
    def test_n2(self):
        assert mo.boolean_moment_c1(2) == THETA ** 2

    def test_n4(self):
        assert mo.boolean_moment_c1(4) == THETA ** 4 + 4 * THETA ** 2

    def test_n5(self):
        expected = THETA ** 5 + 5 * THETA ** 3 + 5 * (2 + Q) * THETA
        assert mo.boolean_moment_c1(5) == expected


class TestLimits:
    def test_boolean_limit(self):
        for n in range(1, 11):
            assert mo.qtilde_limit_check(n, 0) == mo.boolean_moment_c1(n)

    def test_classical_limit(self):
        for n in range(1, 11):
            specialized = mo.qtilde_limit_check(n, 1)
            shifted = MultiPoly.zero()
            for i in range(0, n, 2):
                shifted = shifted + math.comb(n, i) * rt_moment(i // 2) * THETA ** (n - i)
            assert specialized == shifted

    def test_n2_both(self):
        assert mo.qtilde_limit_check(2, 0) == THETA ** 2
        assert mo.qtilde_limit_check(2, 1) == THETA ** 2

    def test_bad_which(self):
        with pytest.raises(ValueError):
            mo.qtilde_limit_check(2, 2)


class TestContinuedFraction:
    def test_leading_order(self):
        z = 1e-9
        b = mo.b_continued_fraction(z, 0.4, 0.5, 0.25)
        assert b / z == pytest.approx(1.0, abs=1e-6)

    def test_classical_closed_form(self):
        for z, x0 in ((0.05, 0.3), (0.1, -0.8), (0.02, 1.5)):
            b = mo.b_continued_fraction(z, x0, 0.5, 1.0)
            assert b == pytest.approx(z / (1 - x0 * z), abs=1e-12)

    def test_against_series(self):
        bs = mo.BSeries.build(12)
        z, x0, q, qt = 0.05, 0.3, 0.5, 0.25
        frac = mo.b_continued_fraction(z, x0, q, qt)
        series = bs.evaluate(z, x0, q, qt)
        assert frac == pytest.approx(series, abs=1e-9)

    def test_theta_scaling(self):
        b1 = mo.b_continued_fraction(0.05, 0.3, 0.5, 0.25)
        b2 = mo.b_continued_fraction(0.05, 0.3, 0.5, 0.25, theta=2.5)
        assert b2 == pytest.approx(2.5 * b1, rel=1e-13)

    def test_depth_validation(self):
        with pytest.raises(ValueError):
            mo.b_continued_fraction(0.05, 0.3, 0.5, 0.25, depth=5)

    def test_bseries_coefficients(self):
        bs = mo.BSeries.build(4)
        assert bs.coeffs[1].coefficient(0) == MultiPoly.theta()
        assert bs.coeffs[0].degree == -1  # empty z^0 entry


class TestPartitionFunction:
    def _rt_float(self, k, q):
        # float transfer matrix, independent of the quadrature path
        L = max(k, 1)
        vec = np.zeros(L + 1)
        vec[0] = 1.0
        for _ in range(2 * k):
            new = np.zeros(L + 1)
            for l in range(L + 1):
                if vec[l]:
                    if l + 1 <= L:
                        new[l + 1] += vec[l]
                    if l - 1 >= 0:
                        new[l - 1] += vec[l] * (1 - q ** l) / (1 - q)
            vec = new
        return vec[0]

    def test_unit_at_beta_zero(self):
        assert mo.z_n(1, 0.0, 0.5, 0.0) == pytest.approx(1.0, abs=1e-12)
        assert mo.z_n(3, 0.0, 0.0, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_laplace_series_at_qt_zero(self):
        for q in (0.0, 0.5):
            for n in (1, 2, 3):
                for beta in (0.5, 1.0):
                    series = sum((n * beta) ** (2 * k) / math.factorial(2 * k)
                                 * self._rt_float(k, q) for k in range(40))
                    assert mo.z_n(n, beta, q, 0.0) == pytest.approx(series, abs=1e-7)

    def test_z1_against_adaptive_quadrature(self):
        from scipy.integrate import quad as adaptive_quad
        q, qt, beta = 0.5, 0.25, 1.0
        R = qh.support_radius(q)
        direct, _ = adaptive_quad(
            lambda E: math.exp(-beta * E) * float(mo.coherent_state_factor(E, q, qt))
            * qh.nu_q_density(E, q),
            -R, R, epsabs=1e-13, epsrel=1e-13, limit=200)
        assert mo.z_n(1, beta, q, qt) == pytest.approx(direct, abs=1e-9)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            mo.z_n(0, 1.0, 0.5, 0.0)
        with pytest.raises(ValueError):
            mo.z_n(1, 1.0, 0.5, 1.0)


class TestMomentTable:
    def test_symbolic_round_trip(self):
        table = mo.MomentTable.symbolic(6)
        again = mo.MomentTable.from_json_obj(table.to_json_obj())
        assert all(again.moment(n) == table.moment(n) for n in range(1, 7))

    def test_specialized_numeric_rows(self):
        table = mo.MomentTable.specialized(4, q=Fraction(1, 2), qt=Fraction(1, 4), theta=2)
        rows = table.numeric_rows()
        assert rows[0] == (1, 2.0)
        assert rows[1] == (2, 4.0)
        m4 = mo.reduced_moment(4).evaluate_exact(Fraction(1, 2), Fraction(1, 4), 2)
        assert rows[3] == (4, float(m4))

    def test_numeric_rows_require_specialization(self):
        with pytest.raises(ValueError):
            mo.MomentTable.symbolic(3).numeric_rows()

    def test_invariant_first_two(self):
        table = mo.MomentTable.symbolic(4)
        assert table.moment(1) == THETA
        assert table.moment(2) == THETA ** 2
