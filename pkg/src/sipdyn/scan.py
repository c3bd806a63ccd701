"""Simulation-based (L, r) outcome-region classification and the critical
aggregation threshold for infection die-out.

Each grid cell is one simulation from a fixed initial state; the outcome is
mapped to coexistence, infection-free, collapse (finite-time susceptible
extinction followed by total die-off) or undecided.  Cells are independent,
so the grid is evaluated with an optional process pool; assembly is by cell
index and therefore deterministic regardless of worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .equilibria import all_equilibria, infection_free_coordinates
from .integrate import (
    CONVERGED,
    S_EXTINCT,
    SimOptions,
    asymptotic_state,
    simulate,
)
from .model import Parameters, State
from .numerics import bracketed_roots

__all__ = [
    "COEXISTENCE",
    "INFECTION_FREE",
    "COLLAPSE",
    "UNDECIDED",
    "RegionGrid",
    "AggregationThreshold",
    "classify_cell",
    "region_grid",
    "infection_growth_at_e3",
    "critical_aggregation",
]

COEXISTENCE = "coexistence"
INFECTION_FREE = "infection_free"
COLLAPSE = "collapse"
UNDECIDED = "undecided"

LABELS = (COEXISTENCE, INFECTION_FREE, COLLAPSE, UNDECIDED)
_LABEL_CODE = {name: i for i, name in enumerate(LABELS)}

#: populations below this are not "bounded away from zero"
AWAY_FROM_ZERO = 1e-3


@dataclass(frozen=True)
class RegionGrid:
    """Cell labels of the (L, r) outcome diagram."""

    L_values: np.ndarray
    r_values: np.ndarray
    codes: np.ndarray  # shape (nL, nr), int8 indices into LABELS
    ic: State
    t_end: float

    def label(self, i_L: int, i_r: int) -> str:
        return LABELS[self.codes[i_L, i_r]]

    def counts(self) -> dict:
        return {name: int(np.sum(self.codes == code)) for name, code in _LABEL_CODE.items()}


def classify_cell(params: Parameters, ic, opts: SimOptions, outcome_tol: float = 1e-3) -> str:
    """Outcome label for a single parameter point."""
    traj = simulate(params, ic, opts)
    final = traj.final_state
    if traj.event_time(S_EXTINCT) is not None and all(v < opts.eps_ext for v in final):
        return COLLAPSE
    if final.I < opts.eps_ext and min(final.S, final.P) > AWAY_FROM_ZERO:
        return INFECTION_FREE
    if traj.reason == CONVERGED:
        converged = True
    else:
        feasible_eqs = [eq for eq in all_equilibria(params) if eq.feasible]
        outcome, _ = asymptotic_state(traj, feasible_eqs, tol=outcome_tol)
        converged = outcome == "converged"
    if converged and all(v > opts.eps_ext for v in final):
        return COEXISTENCE
    return UNDECIDED


def _cell_worker(args) -> int:
    ptuple, ic, opts, outcome_tol = args
    params = Parameters(*ptuple)
    return _LABEL_CODE[classify_cell(params, ic, opts, outcome_tol)]


def region_grid(
    params: Parameters,
    L_range=(-1.0, 1.0),
    r_range=(0.05, 0.95),
    nL: int = 61,
    nr: int = 61,
    ic=(2.0, 1.0, 3.0),
    opts: SimOptions = SimOptions(),
    outcome_tol: float = 1e-3,
    n_jobs: int | None = None,
) -> RegionGrid:
    """Classify every cell of an (L, r) grid by its simulation outcome.

    Ranges must stay inside the admissible parameter box (-K, K) x (0, 1).
    `n_jobs` > 1 runs cells in a process pool; the result is identical to
    the serial one.
    """
    K = params.K
    if not (-K < L_range[0] < L_range[1] < K):
        raise ValueError(f"L range {L_range} must be increasing and inside (-{K}, {K})")
    if not (0.0 < r_range[0] < r_range[1] < 1.0):
        raise ValueError(f"r range {r_range} must be increasing and inside (0, 1)")
    L_values = np.linspace(L_range[0], L_range[1], nL)
    r_values = np.linspace(r_range[0], r_range[1], nr)

    jobs = []
    for L in L_values:
        for r in r_values:
            p = params.replace(L=float(L), r=float(r))
            jobs.append((p.as_tuple(), tuple(ic), opts, outcome_tol))

    if n_jobs is None:
        n_jobs = int(os.environ.get("SIP_DYN_THREADS", "1"))
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            codes = list(pool.map(_cell_worker, jobs, chunksize=max(1, len(jobs) // (8 * n_jobs))))
    else:
        codes = [_cell_worker(j) for j in jobs]

    grid = np.array(codes, dtype=np.int8).reshape(nL, nr)
    return RegionGrid(L_values, r_values, grid, State(*ic), opts.t_end)


@dataclass(frozen=True)
class AggregationThreshold:
    """Critical aggregation exponent separating infection persistence from
    die-out, with the feasibility window of the infection-free state."""

    r_star: float | None
    kind: str  # "root" | "all_extinct" | "none"
    r_feasible: tuple[float, float] | None
    r_feasibility_formula: float | None  # ln(a2/d2)/ln(K) when applicable


def infection_growth_at_e3(params: Parameters) -> float:
    """Growth rate of the infection at the infection-free state,
    e0*S3 - d1*P3 - a1; negative means the infection dies out there."""
    S3, P3 = infection_free_coordinates(params)
    return params.e0 * S3 - params.d1 * P3 - params.a1


def critical_aggregation(params: Parameters, tol: float = 1e-6) -> AggregationThreshold:
    """Threshold r* where the infection-free state gains/loses invadability.

    Solves e0*S3(r) - d1*P3(r) - a1 = 0 over the sub-interval of (0, 1)
    where the infection-free equilibrium is feasible (P3 > 0).  When the
    infection growth rate is negative on the whole feasible window, the
    low feasibility boundary is returned with kind="all_extinct"; when it
    is positive everywhere (or no feasible window exists) the result is
    kind="none" with r_star=None.
    """
    eps = 1e-6
    rs = np.linspace(eps, 1.0 - eps, 2001)
    feasible = []
    for r in rs:
        p = params.replace(r=float(r))
        S3, P3 = infection_free_coordinates(p)
        feasible.append(np.isfinite(P3) and P3 > 0.0 and np.isfinite(S3))
    feasible = np.asarray(feasible)
    a2_over_d2 = params.a2 / params.d2
    formula = (
        float(np.log(a2_over_d2) / np.log(params.K))
        if (a2_over_d2 > 1.0 and params.K > 1.0)
        else None
    )
    if not feasible.any():
        return AggregationThreshold(None, "none", None, formula)
    idx = np.nonzero(feasible)[0]
    r_lo, r_hi = float(rs[idx[0]]), float(rs[idx[-1]])

    def h(r: float) -> float:
        return infection_growth_at_e3(params.replace(r=r))

    pad = 1e-9
    roots = bracketed_roots(h, r_lo + pad, r_hi - pad, n=2001, tol=tol)
    if roots:
        return AggregationThreshold(float(roots[0]), "root", (r_lo, r_hi), formula)
    if h(0.5 * (r_lo + r_hi)) < 0.0:
        # infection dies out for every feasible r
        return AggregationThreshold(r_lo, "all_extinct", (r_lo, r_hi), formula)
    return AggregationThreshold(None, "none", (r_lo, r_hi), formula)
