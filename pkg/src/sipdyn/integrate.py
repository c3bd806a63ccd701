"""Time integration of the model with extinction events and outcome
classification.

The integrator is an adaptive embedded Runge-Kutta 5(4) pair.  Because the
predation term d0*S^r*P is non-Lipschitz at S = 0, extinction is
operationalized as a crossing of a small threshold eps_ext: a component
driven below it is clamped to exactly zero (its derivative then vanishes
term by term, so it stays zero), and the crossing time is localized on the
step's dense interpolant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .equilibria import Equilibrium
from .model import Parameters, State

__all__ = [
    "SimOptions",
    "ExtinctionEvent",
    "Trajectory",
    "SimulationError",
    "simulate",
    "asymptotic_state",
    "S_EXTINCT",
    "I_EXTINCT",
    "P_EXTINCT",
]

S_EXTINCT = "S_extinct"
I_EXTINCT = "I_extinct"
P_EXTINCT = "P_extinct"
_EVENT_KINDS = (S_EXTINCT, I_EXTINCT, P_EXTINCT)

T_END = "t_end"
ALL_EXTINCT = "all_extinct"
CONVERGED = "converged"
_REASONS = {
    _kernels.REASON_T_END: T_END,
    _kernels.REASON_ALL_EXTINCT: ALL_EXTINCT,
    _kernels.REASON_CONVERGED: CONVERGED,
}

CONVERGED_OUTCOME = "converged"
OSCILLATORY = "oscillatory"
COLLAPSED = "collapsed"
UNDECIDED = "undecided"


class SimulationError(RuntimeError):
    """Numerical failure during integration; carries the failure time."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} at t={time:.6g}")
        self.time = time


@dataclass(frozen=True)
class SimOptions:
    """Step control, extinction threshold and convergence-exit settings."""

    t_end: float = 500.0
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    eps_ext: float = 1e-8
    # the step-control noise floor is ~30*rel_tol*|y|, so the convergence
    # tolerance must sit well above it for the early exit to ever fire
    conv_window: float = 20.0
    conv_tol: float = 1e-6
    max_steps: int = 20_000_000

    def __post_init__(self):
        for name in ("t_end", "rel_tol", "abs_tol", "eps_ext", "conv_window", "conv_tol"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"option {name} must be strictly positive")
        if self.eps_ext < self.abs_tol:
            raise ValueError("extinction threshold eps_ext must be >= abs_tol")


@dataclass(frozen=True)
class ExtinctionEvent:
    kind: str
    time: float


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped states plus extinction events and a termination reason."""

    t: np.ndarray
    y: np.ndarray
    events: tuple[ExtinctionEvent, ...]
    reason: str

    @property
    def final_state(self) -> State:
        return State(*self.y[-1])

    def event_time(self, kind: str) -> float | None:
        for ev in self.events:
            if ev.kind == kind:
                return ev.time
        return None


def simulate(params: Parameters, ic, opts: SimOptions = SimOptions(), t0: float = 0.0) -> Trajectory:
    """Integrate from the initial state `ic` up to opts.t_end.

    Components of `ic` must be nonnegative; components already below the
    extinction threshold start clamped at zero (without an event).  Raises
    :class:`SimulationError` on step-size underflow.
    """
    ic = [float(v) for v in ic]
    if len(ic) != 3 or any(not np.isfinite(v) or v < 0.0 for v in ic):
        raise ValueError(f"initial state must be three nonnegative finite numbers, got {ic}")
    t, y, raw_events, reason_code, fail_time = _kernels.integrate(
        params.as_tuple(),
        ic,
        t0,
        t0 + opts.t_end,
        opts.rel_tol,
        opts.abs_tol,
        opts.eps_ext,
        opts.conv_window,
        opts.conv_tol,
        opts.max_steps,
    )
    if reason_code == _kernels.REASON_UNDERFLOW:
        raise SimulationError("step-size underflow (h < 1e-14)", fail_time)
    if reason_code == _kernels.REASON_STEP_LIMIT:
        raise SimulationError("step limit exceeded", fail_time)
    events = tuple(ExtinctionEvent(_EVENT_KINDS[i], float(tt)) for i, tt in raw_events)
    return Trajectory(t=t, y=y, events=events, reason=_REASONS[reason_code])


def _window_slice(traj: Trajectory, span_fraction: float = 0.1) -> slice:
    t = traj.t
    span = t[-1] - t[0]
    if span <= 0.0:
        return slice(0, len(t))
    cut = t[-1] - span_fraction * span
    start = int(np.searchsorted(t, cut))
    return slice(min(start, len(t) - 2), len(t))


def asymptotic_state(
    traj: Trajectory,
    eqs: list[Equilibrium],
    tol: float = 1e-3,
) -> tuple[str, str | None]:
    """Classify the tail of a trajectory.

    Returns (outcome, equilibrium_kind):

    - ("converged", kind) when the final window stays within `tol` of one of
      the supplied equilibria;
    - ("collapsed", None) when every component has been clamped to zero;
    - ("oscillatory", None) when the window shows bounded, non-contracting
      peak-to-peak amplitude above 10*tol;
    - ("undecided", None) otherwise.
    """
    final = traj.y[-1]
    if np.all(final == 0.0):
        return COLLAPSED, None

    window = traj.y[_window_slice(traj)]
    best_kind = None
    best_dev = np.inf
    for eq in eqs:
        point = np.asarray(eq.point, dtype=float)
        dev = float(np.max(np.abs(window - point)))
        if dev < best_dev:
            best_dev = dev
            best_kind = eq.kind
    if best_kind is not None and best_dev < tol:
        return CONVERGED_OUTCOME, best_kind

    amplitude = float(np.max(window.max(axis=0) - window.min(axis=0)))
    if amplitude > 10.0 * tol and np.all(np.isfinite(window)):
        half = len(window) // 2
        first = window[:half]
        second = window[half:]
        amp_first = float(np.max(first.max(axis=0) - first.min(axis=0)))
        amp_second = float(np.max(second.max(axis=0) - second.min(axis=0)))
        if amp_second > 0.5 * amp_first:
            return OSCILLATORY, None
    return UNDECIDED, None
