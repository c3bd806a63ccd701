"""Dynamics of a susceptible/infected-prey/predator model with prey
aggregation and an Allee effect: equilibria, stability, codimension-1/2
bifurcations, disease thresholds and finite-time extinction.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .equilibria import (
    Equilibrium,
    StabilityReport,
    boundary_equilibria,
    classify,
    interior_equilibria,
)
from .integrate import SimOptions, SimulationError, Trajectory, asymptotic_state, simulate
from .model import Parameters, State, jacobian, per_capita_growth, rhs

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "Parameters",
    "State",
    "rhs",
    "jacobian",
    "per_capita_growth",
    "Equilibrium",
    "StabilityReport",
    "boundary_equilibria",
    "interior_equilibria",
    "classify",
    "SimOptions",
    "SimulationError",
    "Trajectory",
    "simulate",
    "asymptotic_state",
    "__version__",
]
