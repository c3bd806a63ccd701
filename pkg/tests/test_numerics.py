import math

import numpy as np
import pytest

from sipdyn.equilibria import interior_equilibria, predator_free_coordinates
from sipdyn.model import Parameters, jacobian
from sipdyn.numerics import MARGINAL, STABLE, UNSTABLE, CubicCoefficients, bracketed_roots, char_coeffs, eig3, routh_hurwitz

from conftest import BASELINE


class TestCharCoeffs:
    def test_identity_matrix(self):
        c = char_coeffs(np.eye(3))
        assert c == pytest.approx((-3.0, 3.0, -1.0))

    def test_stable_diagonal(self):
        c = char_coeffs(np.diag([-1.0, -2.0, -3.0]))
        assert c == pytest.approx((6.0, 11.0, 6.0))

    def test_dual_formula_cross_check_at_coexistence(self, base):
        # with zero (2,2) and (3,3) entries the coefficients reduce to the
        # product forms; both routes must agree
        eq = interior_equilibria(base)[0]
        J = jacobian(eq.point, base)
        assert abs(J[1, 1]) < 1e-9 and abs(J[2, 2]) < 1e-9
        c = char_coeffs(J)
        omega1 = -J[0, 0]
        omega2 = -(J[1, 2] * J[2, 1] + J[0, 1] * J[1, 0] + J[0, 2] * J[2, 0])
        omega3 = (
            J[0, 0] * J[1, 2] * J[2, 1]
            - J[0, 1] * J[1, 2] * J[2, 0]
            - J[0, 2] * J[1, 0] * J[2, 1]
        )
        assert c.omega1 == pytest.approx(omega1, abs=1e-10)
        assert c.omega2 == pytest.approx(omega2, abs=1e-10)
        assert c.omega3 == pytest.approx(omega3, abs=1e-10)


class TestEig3:
    def test_real_diagonal(self):
        eigs = eig3(np.diag([2.0, -1.0, -1.0]))
        assert eigs[0] == pytest.approx(2.0)
        assert eigs[1] == pytest.approx(-1.0)
        assert eigs[2] == pytest.approx(-1.0)

    def test_pure_imaginary_pair_with_zero(self):
        # companion matrix of lambda^3 + lambda
        C = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]])
        eigs = eig3(C)
        by_imag = sorted(eigs, key=lambda z: z.imag)
        assert by_imag[0] == pytest.approx(-1j, abs=1e-12)
        assert by_imag[1] == pytest.approx(0.0, abs=1e-12)
        assert by_imag[2] == pytest.approx(1j, abs=1e-12)

    def test_near_zero_eigenvalue_at_predator_invasion_threshold(self):
        p = Parameters(**{**BASELINE, "L": -0.4312})
        S2, I2 = predator_free_coordinates(p)
        eigs = eig3(jacobian((S2, I2, 0.0), p))
        assert min(abs(z) for z in eigs) < 1e-3

    def test_ordering_and_conjugacy(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            M = rng.normal(size=(3, 3))
            eigs = eig3(M)
            reals = [z.real for z in eigs]
            assert reals == sorted(reals, reverse=True)
            complexes = [z for z in eigs if abs(z.imag) > 1e-12]
            if complexes:
                assert len(complexes) == 2
                assert complexes[0] == pytest.approx(complexes[1].conjugate())

    def test_root_residual_sum_and_product(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            M = rng.normal(size=(3, 3)) * rng.uniform(0.1, 5.0)
            c = char_coeffs(M)
            eigs = eig3(M)
            scale = 1e-9 * (1.0 + max(abs(c.omega1), abs(c.omega2), abs(c.omega3)))
            for z in eigs:
                res = z**3 + c.omega1 * z**2 + c.omega2 * z + c.omega3
                assert abs(res) < 1000 * scale
            assert sum(eigs) == pytest.approx(-c.omega1, abs=1e-8 * (1 + abs(c.omega1)))
            prod = eigs[0] * eigs[1] * eigs[2]
            assert prod == pytest.approx(-c.omega3, abs=1e-7 * (1 + abs(c.omega3)))


class TestRouthHurwitz:
    def test_stable_cubic(self):
        verdict, margins = routh_hurwitz(CubicCoefficients(6.0, 11.0, 6.0))
        assert verdict == STABLE
        assert margins == (6.0, 6.0, 60.0)

    def test_unstable_cubic(self):
        verdict, _ = routh_hurwitz(CubicCoefficients(-6.0, 11.0, -6.0))
        assert verdict == UNSTABLE

    def test_marginal_at_hopf_condition(self):
        # omega1 * omega2 == omega3 exactly
        verdict, margins = routh_hurwitz(CubicCoefficients(2.0, 3.0, 6.0))
        assert verdict == MARGINAL
        assert margins[2] == 0.0

    def test_sign_agreement_with_eigenvalues(self):
        rng = np.random.default_rng(123)
        for _ in range(1000):
            M = rng.normal(size=(3, 3)) * rng.uniform(0.2, 3.0)
            verdict, _ = routh_hurwitz(char_coeffs(M))
            max_re = max(z.real for z in eig3(M))
            if verdict == STABLE:
                assert max_re < 0.0
            elif verdict == UNSTABLE:
                assert max_re > -1e-6


class TestBracketedRoots:
    def test_sqrt_two(self):
        roots = bracketed_roots(lambda x: x * x - 2.0, 0.0, 2.0, n=100, tol=1e-12)
        assert len(roots) == 1
        assert roots[0] == pytest.approx(math.sqrt(2.0), abs=1e-11)

    def test_sine_two_roots(self):
        roots = bracketed_roots(math.sin, 1.0, 7.0, n=100, tol=1e-12)
        assert len(roots) == 2
        assert roots[0] == pytest.approx(math.pi, abs=1e-10)
        assert roots[1] == pytest.approx(2.0 * math.pi, abs=1e-10)

    def test_nullcline_residual_two_interior_roots(self):
        from sipdyn._kernels import nullcline_residual

        p = Parameters(**{**BASELINE, "L": -0.1})
        S2 = p.a1 / p.e0
        S3 = (p.a2 / p.d2) ** (1.0 / p.r)
        roots = bracketed_roots(
            lambda s: nullcline_residual(s, p.as_tuple()), S2 + 1e-9, S3 - 1e-9, n=2001, tol=1e-12
        )
        assert len(roots) == 2
        assert roots[0] == pytest.approx(0.9578, abs=1e-3)
        assert roots[1] == pytest.approx(2.4296, abs=1e-3)

    def test_finds_all_separated_roots_of_random_cubics(self):
        rng = np.random.default_rng(5)
        a, b, n = -4.0, 4.0, 400
        min_sep = (b - a) / n
        found = 0
        for _ in range(100):
            roots = np.sort(rng.uniform(a + 0.3, b - 0.3, size=3))
            if np.min(np.diff(roots)) <= 1.5 * min_sep:
                continue
            found += 1
            poly = np.poly(roots)

            got = bracketed_roots(lambda x: np.polyval(poly, x), a, b, n=n, tol=1e-12)
            assert len(got) == 3
            assert np.allclose(got, roots, atol=1e-9)
        assert found > 50

    def test_empty_when_no_sign_change(self):
        assert bracketed_roots(lambda x: 1.0 + x * x, -1.0, 1.0) == []

    def test_input_validation(self):
        with pytest.raises(ValueError):
            bracketed_roots(math.sin, 2.0, 1.0)
        with pytest.raises(ValueError):
            bracketed_roots(math.sin, 0.0, 1.0, n=1)
