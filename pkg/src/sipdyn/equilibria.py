"""Enumeration and local stability classification of the model equilibria.

Boundary equilibria have closed forms; interior (coexistence) equilibria
reduce to the scalar susceptible-nullcline residual g(S) after eliminating
I and P from the infected and predator nullclines:

    I*(S) = (a2 - d2*S^r) / d3        (> 0 iff S < S3)
    P*(S) = (e0*S - a1) / d1          (> 0 iff S > S2)

so every coexistence state satisfies S2 < S* < S3 with S2 = a1/e0 and
S3 = (a2/d2)^(1/r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, numerics
from .model import Parameters, SingularJacobianError, State, jacobian, rhs

__all__ = [
    "E0",
    "E1_K",
    "E1_L",
    "E2_PREDATOR_FREE",
    "E3_INFECTION_FREE",
    "E4_INTERIOR",
    "Equilibrium",
    "StabilityReport",
    "boundary_equilibria",
    "interior_equilibria",
    "interior_window",
    "interior_coordinates",
    "predator_free_coordinates",
    "infection_free_coordinates",
    "all_equilibria",
    "classify",
    "residual_norm",
]

E0 = "E0"
E1_K = "E1_K"
E1_L = "E1_L"
E2_PREDATOR_FREE = "E2_predator_free"
E3_INFECTION_FREE = "E3_infection_free"
E4_INTERIOR = "E4_interior"

# interior root scan (resolves the two-root regime with wide margin)
SCAN_POINTS = 2001
SCAN_TOL = 1e-12


@dataclass(frozen=True)
class Equilibrium:
    """A located steady state with a kind tag and feasibility flag."""

    kind: str
    point: State
    feasible: bool


@dataclass(frozen=True)
class StabilityReport:
    """Eigenvalues, characteristic coefficients, verdict and condition flags."""

    eigenvalues: tuple
    coefficients: numerics.CubicCoefficients
    verdict: str
    conditions: dict
    margins: tuple


def predator_free_coordinates(params: Parameters) -> tuple[float, float]:
    """Closed-form (S2, I2) of the predator-free equilibrium.

    I2 has a pole where its denominator vanishes (the equilibrium escapes
    to infinity); nan is returned there so callers can flag the point.
    """
    a0, a1, e0, K, L = params.a0, params.a1, params.e0, params.K, params.L
    S2 = a1 / e0
    denom = e0 * (-a0 * e0 * L + a0 * a1 + e0 * e0 * K)
    if denom == 0.0:
        return S2, float("nan")
    I2 = -a0 * (a1 - e0 * K) * (a1 - e0 * L) / denom
    return S2, I2


def infection_free_coordinates(params: Parameters) -> tuple[float, float]:
    """Closed-form (S3, P3) of the infection-free equilibrium.

    S3 = (a2/d2)^(1/r) explodes for small aggregation exponents; it is
    evaluated in log space and reported as inf (with P3 = -inf, infeasible)
    when it overflows.
    """
    a0, a2, d0, d2, K, L, r = (
        params.a0,
        params.a2,
        params.d0,
        params.d2,
        params.K,
        params.L,
        params.r,
    )
    log_s3 = math.log(a2 / d2) / r
    if log_s3 > 690.0:
        return math.inf, -math.inf
    S3 = math.exp(log_s3)
    P3 = -a0 * S3 ** (1.0 - r) * (S3 - K) * (S3 - L) / (d0 * K)
    return S3, P3


def boundary_equilibria(params: Parameters) -> list[Equilibrium]:
    """E0, E1 (both prey-only states), E2 and E3 with feasibility flags.

    Infeasible entries are returned flagged rather than dropped, so branch
    tracking can follow them through feasibility boundaries.
    """
    out = [
        Equilibrium(E0, State(0.0, 0.0, 0.0), True),
        Equilibrium(E1_K, State(params.K, 0.0, 0.0), True),
        Equilibrium(E1_L, State(params.L, 0.0, 0.0), params.L > 0.0),
    ]
    S2, I2 = predator_free_coordinates(params)
    out.append(Equilibrium(E2_PREDATOR_FREE, State(S2, I2, 0.0), I2 > 0.0))
    S3, P3 = infection_free_coordinates(params)
    out.append(Equilibrium(E3_INFECTION_FREE, State(S3, 0.0, P3), P3 > 0.0))
    return out


def interior_window(params: Parameters) -> tuple[float, float] | None:
    """Open S-interval that can contain coexistence states, or None.

    The theoretical window is (S2, S3); the scan is cut at K because g < 0
    on [K, S3) (the logistic factor is negative there while I* > 0), and S3
    grows like (a2/d2)^(1/r), which would starve the grid for small r.
    """
    S2 = params.a1 / params.e0
    S3 = infection_free_coordinates(params)[0]
    hi = min(S3, params.K)
    if not (0.0 < S2 < hi):
        return None
    return S2, hi


def interior_coordinates(S: float, params: Parameters) -> State:
    """Coexistence state on the reduced nullclines at susceptible density S."""
    I = (params.a2 - params.d2 * S**params.r) / params.d3
    P = (params.e0 * S - params.a1) / params.d1
    return State(S, I, P)


def interior_equilibria(params: Parameters) -> list[Equilibrium]:
    """All coexistence equilibria, one per root of g(S) on the scan window."""
    window = interior_window(params)
    if window is None:
        return []
    lo, hi = window
    delta = 1e-9 * (hi - lo)
    roots = _kernels.nullcline_root_scan(
        params.as_tuple(), lo + delta, hi - delta, SCAN_POINTS, SCAN_TOL
    )
    return [Equilibrium(E4_INTERIOR, interior_coordinates(S, params), True) for S in roots]


def all_equilibria(params: Parameters) -> list[Equilibrium]:
    return boundary_equilibria(params) + interior_equilibria(params)


def _condition_flags(eq: Equilibrium, J: np.ndarray, params: Parameters) -> dict:
    if eq.kind in (E1_K, E1_L):
        S1 = eq.point.S
        return {
            "growth_decay": bool(J[0, 0] < 0.0),
            "infection_decay": bool(params.e0 * S1 < params.a1),
            "predator_decay": bool(params.d2 * S1**params.r < params.a2),
        }
    if eq.kind == E2_PREDATOR_FREE:
        return {
            "C11_neg": bool(J[0, 0] < 0.0),
            "C33_neg": bool(J[2, 2] < 0.0),
            "C12C21_neg": bool(J[0, 1] * J[1, 0] < 0.0),
        }
    if eq.kind == E3_INFECTION_FREE:
        return {"H11_neg": bool(J[0, 0] < 0.0), "H22_neg": bool(J[1, 1] < 0.0)}
    c = numerics.char_coeffs(J)
    return {
        "omega1_pos": bool(c.omega1 > 0.0),
        "omega3_pos": bool(c.omega3 > 0.0),
        "product_margin_pos": bool(c.omega1 * c.omega2 - c.omega3 > 0.0),
    }


def classify(eq: Equilibrium, params: Parameters) -> StabilityReport:
    """Local stability report for a feasible equilibrium.

    The verdict comes from the eigenvalues (via the Routh-Hurwitz margins of
    the characteristic cubic); the per-kind condition flags are sufficient
    conditions and are reported as diagnostics.  The extinction state E0 is
    refused: the Jacobian is singular there.
    """
    if eq.kind == E0:
        raise SingularJacobianError(
            "the extinction equilibrium cannot be linearized (S^(r-1) terms are singular)"
        )
    if not eq.feasible:
        raise ValueError(f"cannot classify infeasible equilibrium {eq.kind} at {tuple(eq.point)}")
    J = jacobian(eq.point, params)
    coeffs = numerics.char_coeffs(J)
    verdict, margins = numerics.routh_hurwitz(coeffs)
    return StabilityReport(
        eigenvalues=numerics.eig3(J),
        coefficients=coeffs,
        verdict=verdict,
        conditions=_condition_flags(eq, J, params),
        margins=margins,
    )


def residual_norm(eq: Equilibrium, params: Parameters) -> float:
    """Max-norm of the vector field at an equilibrium (should be ~0)."""
    return max(abs(v) for v in rhs(eq.point, params))
