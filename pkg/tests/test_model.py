import math

import numpy as np
import pytest

from sipdyn.model import (
    Parameters,
    SingularJacobianError,
    jacobian,
    per_capita_growth,
    rhs,
    second_derivative_tensor,
)

from conftest import BASELINE, random_params, random_state


def fd_jacobian(state, params, h=1e-6):
    """Independent central-difference oracle for the Jacobian."""
    J = np.empty((3, 3))
    x = np.asarray(state, dtype=float)
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        up = np.array(rhs(x + e, params))
        dn = np.array(rhs(x - e, params))
        J[:, k] = (up - dn) / (2.0 * h)
    return J


class TestParameters:
    def test_valid_construction(self, base):
        assert base.K == 4.0 and base.r == 0.5

    @pytest.mark.parametrize(
        "changes",
        [
            {"a0": 0.0},
            {"a1": -0.1},
            {"K": 0.0},
            {"r": 0.0},
            {"r": 1.0},
            {"r": 1.5},
            {"L": 4.0},
            {"L": -4.0},
            {"L": 5.2},
        ],
    )
    def test_invalid_rejected(self, changes):
        values = dict(BASELINE)
        values.update(changes)
        with pytest.raises(ValueError):
            Parameters(**values)

    def test_unboxed_replace_allows_large_allee_threshold(self, base):
        p = base.replace_unboxed(L=4.43)
        assert p.L == 4.43
        with pytest.raises(ValueError):
            base.replace_unboxed(a0=-1.0)

    def test_tuple_order(self, base):
        assert base.as_tuple() == (3, 0.4, 0.8, 0.4, 0.7, 0.3, 0.4, 0.9, 4, -0.5, 0.5)


class TestRhs:
    def test_origin_is_equilibrium(self, base):
        assert rhs((0, 0, 0), base) == (0.0, 0.0, 0.0)

    def test_carrying_capacity_prey_only_is_equilibrium(self, base):
        assert rhs((base.K, 0, 0), base) == (0.0, 0.0, 0.0)

    def test_hand_substitution_at_unit_state(self, base):
        dS, dI, dP = rhs((1, 1, 1), base)
        # 3*1*(1 - 2/4)*(1.5) - 0.4 - 0.9 = 0.95; -0.4 + 0.9 - 0.7; -0.8 + 0.3 + 0.4
        assert dS == pytest.approx(0.95, abs=1e-14)
        assert dI == pytest.approx(-0.2, abs=1e-14)
        assert dP == pytest.approx(-0.1, abs=1e-14)

    def test_continuous_at_vanishing_susceptibles(self, base):
        at_zero = np.array(rhs((0.0, 0.7, 1.3), base))
        for eps in (1e-4, 1e-6, 1e-8, 1e-10):
            near = np.array(rhs((eps, 0.7, 1.3), base))
            assert np.max(np.abs(near - at_zero)) < 5.0 * eps**base.r

    def test_total_on_octant_boundaries(self, base):
        for state in [(0, 1, 1), (1, 0, 1), (1, 1, 0), (0, 0, 2)]:
            out = rhs(state, base)
            assert all(math.isfinite(v) for v in out)


class TestJacobian:
    def test_prey_only_rows_are_diagonal(self, base):
        J = jacobian((base.K, 0, 0), base)
        assert J[1, 0] == J[1, 2] == J[2, 0] == J[2, 1] == 0.0
        assert J[1, 1] == pytest.approx(base.e0 * base.K - base.a1)
        assert J[2, 2] == pytest.approx(base.d2 * base.K**base.r - base.a2)

    def test_predation_entry_closed_form(self, base):
        # dW1/dP = -d0 * S^r = -0.4 * 2 at S = 4
        assert jacobian((4, 0, 0), base)[0, 2] == pytest.approx(-0.8, abs=1e-14)

    def test_matches_finite_differences_at_unit_state(self, base):
        J = jacobian((1, 1, 1), base)
        J_fd = fd_jacobian((1, 1, 1), base)
        assert np.max(np.abs(J - J_fd) / (1.0 + np.abs(J))) < 1e-6

    def test_matches_finite_differences_randomly(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            p = random_params(rng)
            x = random_state(rng, p.K)
            J = jacobian(x, p)
            J_fd = fd_jacobian(x, p)
            assert np.max(np.abs(J - J_fd) / (1.0 + np.abs(J))) < 1e-5

    def test_sign_structure(self, base):
        J = jacobian((1.2, 0.8, 2.0), base)
        assert J[0, 2] <= 0.0  # predation on susceptibles
        assert J[1, 0] >= 0.0  # transmission
        assert J[1, 2] <= 0.0  # predation on infected
        assert J[2, 0] >= 0.0 and J[2, 1] >= 0.0  # predator gains

    def test_singular_at_zero_susceptibles(self, base):
        with pytest.raises(SingularJacobianError):
            jacobian((0.0, 1.0, 1.0), base)


class TestPerCapitaGrowth:
    def test_zero_at_allee_threshold(self):
        p = Parameters(**{**BASELINE, "L": 0.7})
        assert per_capita_growth(0.7, 1.3, p) == pytest.approx(0.0, abs=1e-15)

    def test_zero_at_carrying_capacity(self, base):
        assert per_capita_growth(base.K, 0.0, base) == pytest.approx(0.0, abs=1e-15)

    def test_hand_value(self):
        p = Parameters(**{**BASELINE, "L": 0.7})
        # 3 * (1 - 2/4) * (2 - 0.7)
        assert per_capita_growth(2.0, 0.0, p) == pytest.approx(1.95, abs=1e-14)


def test_second_derivative_tensor_is_symmetric(base):
    H = second_derivative_tensor((1.3, 0.9, 1.7), base)
    assert np.max(np.abs(H - H.transpose(0, 2, 1))) < 1e-12
