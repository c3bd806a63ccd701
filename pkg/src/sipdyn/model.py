"""Vector field, Jacobian and growth-rate functions of the SIP model.

The model tracks susceptible prey S, infected prey I and predators P:

    dS/dt = a0*S*(1 - (S+I)/K)*(S - L) - d0*S^r*P - e0*S*I
    dI/dt = -a1*I + e0*S*I - d1*I*P
    dP/dt = -a2*P + d2*S^r*P + d3*I*P

Susceptible growth is logistic in the total prey population with an Allee
factor (S - L); predation on susceptibles goes through the aggregation
exponent r in (0, 1), which makes the field non-Lipschitz at S = 0.  The
convention 0^r := 0 keeps the field defined and continuous on the closed
positive octant, which the time integrator relies on for extinction runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import NamedTuple

import numpy as np

__all__ = [
    "Parameters",
    "State",
    "SingularJacobianError",
    "rhs",
    "jacobian",
    "per_capita_growth",
]

PARAMETER_NAMES = ("a0", "a1", "a2", "d0", "d1", "d2", "d3", "e0", "K", "L", "r")


class SingularJacobianError(ValueError):
    """Raised when the Jacobian is requested at a point where it is singular."""


@dataclass(frozen=True)
class Parameters:
    """The eleven model constants.

    All rates and the carrying capacity K must be strictly positive and the
    aggregation exponent r must lie in (0, 1).  The Allee threshold L may be
    negative (weak Allee regime -K < L <= 0) or positive (strong regime
    0 < L < K) but must stay inside (-K, K).
    """

    a0: float  # susceptible birth-rate coefficient
    a1: float  # infected natural death rate
    a2: float  # predator natural death rate
    d0: float  # predator attack rate on susceptibles
    d1: float  # predator attack rate on infected
    d2: float  # biomass conversion from susceptibles
    d3: float  # biomass conversion from infected
    e0: float  # disease transmission rate
    K: float  # carrying capacity of the total prey population
    L: float  # Allee threshold
    r: float  # aggregation exponent

    def __post_init__(self):
        self._check_rates()
        if not (-self.K < self.L < self.K):
            raise ValueError(f"Allee threshold L={self.L} must lie in (-K, K)=(-{self.K}, {self.K})")

    def _check_rates(self):
        for name in ("a0", "a1", "a2", "d0", "d1", "d2", "d3", "e0", "K"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"parameter {name}={value} must be a positive finite number")
        if not (math.isfinite(self.L)):
            raise ValueError(f"Allee threshold L={self.L} must be finite")
        if not (0.0 < self.r < 1.0):
            raise ValueError(f"aggregation exponent r={self.r} must lie in (0, 1)")

    def replace(self, **changes) -> "Parameters":
        """Return a copy with the given fields replaced (revalidates)."""
        return replace(self, **changes)

    def replace_unboxed(self, **changes) -> "Parameters":
        """Copy with fields replaced, skipping the -K < L < K box check.

        Curve tracing follows bifurcation loci outside the biological box
        (the fold curve reaches L > K); rate positivity and r in (0, 1) are
        still enforced.
        """
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        out = object.__new__(Parameters)
        for name, value in values.items():
            object.__setattr__(out, name, float(value))
        out._check_rates()
        return out

    def as_tuple(self) -> tuple:
        """Fixed-order tuple (a0, a1, a2, d0, d1, d2, d3, e0, K, L, r)."""
        return tuple(getattr(self, name) for name in PARAMETER_NAMES)

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in PARAMETER_NAMES}


class State(NamedTuple):
    """One point (S, I, P) of population densities."""

    S: float
    I: float
    P: float


def _powr(s: float, r: float) -> float:
    # 0^r := 0; also guards RK stage values that overshoot slightly below 0.
    return s**r if s > 0.0 else 0.0


def rhs(state, params: Parameters) -> tuple[float, float, float]:
    """Time derivatives (dS/dt, dI/dt, dP/dt) at a state.

    Total on the closed positive octant; S^r is evaluated with the 0^r := 0
    convention so the field is continuous at S = 0.
    """
    S, I, P = state
    a0, a1, a2, d0, d1, d2, d3, e0, K, L, r = params.as_tuple()
    sr = _powr(S, r)
    dS = a0 * S * (1.0 - (S + I) / K) * (S - L) - d0 * sr * P - e0 * S * I
    dI = -a1 * I + e0 * S * I - d1 * I * P
    dP = -a2 * P + d2 * sr * P + d3 * I * P
    return (dS, dI, dP)


def jacobian(state, params: Parameters) -> np.ndarray:
    """Analytic 3x3 Jacobian of :func:`rhs` at a state with S > 0.

    The entries containing S^(r-1) are singular at S = 0, so the extinction
    state cannot be linearized; a :class:`SingularJacobianError` is raised
    there.
    """
    S, I, P = state
    if S <= 0.0:
        raise SingularJacobianError(
            f"Jacobian is singular at S={S}; entries contain S^(r-1) and require S > 0"
        )
    a0, a1, a2, d0, d1, d2, d3, e0, K, L, r = params.as_tuple()
    sr = S**r
    sr1 = S ** (r - 1.0)
    j11 = (
        a0 * (-K * L + 2.0 * K * S + 2.0 * L * S + L * I - 3.0 * S * S - 2.0 * S * I) / K
        - d0 * r * sr1 * P
        - e0 * I
    )
    j12 = -S * (a0 * (S - L) + e0 * K) / K
    j13 = -d0 * sr
    j21 = e0 * I
    j22 = -a1 + e0 * S - d1 * P
    j23 = -d1 * I
    j31 = r * d2 * sr1 * P
    j32 = d3 * P
    j33 = -a2 + d2 * sr + d3 * I
    return np.array([[j11, j12, j13], [j21, j22, j23], [j31, j32, j33]], dtype=float)


def per_capita_growth(S: float, I: float, params: Parameters) -> float:
    """Per-capita growth rate a0*(1 - (S+I)/K)*(S - L) of susceptible prey."""
    return params.a0 * (1.0 - (S + I) / params.K) * (S - params.L)


def rhs_parameter_derivative(state, params: Parameters, name: str, h_rel: float = 1e-6):
    """Central finite-difference derivative of rhs with respect to one parameter."""
    if name not in PARAMETER_NAMES:
        raise ValueError(f"unknown parameter {name!r}")
    p0 = getattr(params, name)
    h = h_rel * (1.0 + abs(p0))
    up = params.replace_unboxed(**{name: p0 + h})
    dn = params.replace_unboxed(**{name: p0 - h})
    fu = rhs(state, up)
    fd = rhs(state, dn)
    return np.array([(fu[i] - fd[i]) / (2.0 * h) for i in range(3)])


def jacobian_parameter_derivative(state, params: Parameters, name: str, h_rel: float = 1e-6):
    """Central finite-difference derivative of the Jacobian wrt one parameter."""
    if name not in PARAMETER_NAMES:
        raise ValueError(f"unknown parameter {name!r}")
    p0 = getattr(params, name)
    h = h_rel * (1.0 + abs(p0))
    up = params.replace_unboxed(**{name: p0 + h})
    dn = params.replace_unboxed(**{name: p0 - h})
    return (jacobian(state, up) - jacobian(state, dn)) / (2.0 * h)


def second_derivative_tensor(state, params: Parameters, h_rel: float = 1e-4) -> np.ndarray:
    """Tensor H[i, j, k] = d2 rhs_i / dx_j dx_k by central differences of the Jacobian."""
    x = np.asarray(state, dtype=float)
    H = np.empty((3, 3, 3))
    for k in range(3):
        h = h_rel * (1.0 + abs(x[k]))
        e = np.zeros(3)
        e[k] = h
        H[:, :, k] = (jacobian(x + e, params) - jacobian(x - e, params)) / (2.0 * h)
    # enforce symmetry in the differentiation indices
    return (H + H.transpose(0, 2, 1)) / 2.0


def third_derivative_tensor(state, params: Parameters, h_rel: float = 1e-4) -> np.ndarray:
    """Tensor T[i, j, k, l] = d3 rhs_i / dx_j dx_k dx_l (finite differences)."""
    x = np.asarray(state, dtype=float)
    T = np.empty((3, 3, 3, 3))
    for k in range(3):
        hk = h_rel * (1.0 + abs(x[k]))
        ek = np.zeros(3)
        ek[k] = hk
        for l in range(k, 3):
            if l == k:
                d2 = (jacobian(x + ek, params) - 2.0 * jacobian(x, params) + jacobian(x - ek, params)) / hk**2
            else:
                hl = h_rel * (1.0 + abs(x[l]))
                el = np.zeros(3)
                el[l] = hl
                d2 = (
                    jacobian(x + ek + el, params)
                    - jacobian(x + ek - el, params)
                    - jacobian(x - ek + el, params)
                    + jacobian(x - ek - el, params)
                ) / (4.0 * hk * hl)
            T[:, :, k, l] = d2
            T[:, :, l, k] = d2
    return T


def multilinear2(H: np.ndarray, u, v) -> np.ndarray:
    """Bilinear form B(u, v) built from the second-derivative tensor."""
    return np.einsum("ijk,j,k->i", H, u, v)


def multilinear3(T: np.ndarray, u, v, w) -> np.ndarray:
    """Trilinear form C(u, v, w) built from the third-derivative tensor."""
    return np.einsum("ijkl,j,k,l->i", T, u, v, w)
