"""Two-parameter analysis: fold and Hopf point loci with codimension-two
point flagging (cusp, Bogdanov-Takens, zero-Hopf, generalized Hopf).

Curves are traced in the full unknown vector u = (S, I, P, p1, p2) on the
augmented system {rhs = 0, test function = 0} with a secant predictor and a
damped-Newton corrector in the hyperplane orthogonal to the step.  Tracing
in the full space keeps the curve smooth through cusps (which are only
singular in the parameter-plane projection) and through the P = 0 boundary
(state coordinates may go negative; each point carries a feasibility flag).

The fold defining system {rhs = 0, det J = 0} is also satisfied along the
predator-free branch wherever its predator-invasion eigenvalue vanishes.
That closed-form locus intersects the interior fold curve exactly where the
fold state crosses P = 0 (a branch point of the defining system), so a fold
trace additionally continues the locus from any such crossing and evaluates
the same monitors there, reporting branch identity per point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .codim1 import NotAHopfPointError, first_lyapunov
from .equilibria import (
    E2_PREDATOR_FREE,
    E4_INTERIOR,
    Equilibrium,
    boundary_equilibria,
    interior_equilibria,
    predator_free_coordinates,
)
from .model import (
    PARAMETER_NAMES,
    Parameters,
    State,
    jacobian,
    multilinear2,
    rhs,
    second_derivative_tensor,
)

__all__ = [
    "CUSP",
    "BOGDANOV_TAKENS",
    "ZERO_HOPF",
    "GENERALIZED_HOPF",
    "FOLD",
    "HOPF_CURVE",
    "CurvePoint",
    "Codim2Point",
    "CurveTraceError",
    "trace_curve",
    "solve_zh_on_boundary",
]

FOLD = "fold"
HOPF_CURVE = "hopf"

CUSP = "cusp"
BOGDANOV_TAKENS = "bogdanov_takens"
ZERO_HOPF = "zero_hopf"
GENERALIZED_HOPF = "generalized_hopf"

#: adaptive step bounds in normalized units
STEP_MIN = 1e-4
STEP_MAX = 5e-2
#: localization tolerance along the curve for codim-2 points
MONITOR_TOL = 1e-6

_MONITOR_KIND = {
    "fold_quadratic": CUSP,
    "omega2": BOGDANOV_TAKENS,
    "omega1": ZERO_HOPF,
    "first_lyapunov": GENERALIZED_HOPF,
}


class CurveTraceError(RuntimeError):
    pass


@dataclass(frozen=True)
class CurvePoint:
    p1: float
    p2: float
    equilibrium: Equilibrium
    curve_kind: str
    branch: str
    monitors: dict


@dataclass(frozen=True)
class Codim2Point:
    kind: str
    p1: float
    p2: float
    equilibrium: Equilibrium
    eigenvalues: tuple
    feasible: bool
    branch: str = "interior"
    diagnostics: dict = field(default_factory=dict)


def _params_with(params: Parameters, p1: str, v1: float, p2: str, v2: float) -> Parameters:
    return params.replace_unboxed(**{p1: v1, p2: v2})


def _canonical(v: np.ndarray) -> np.ndarray:
    # SVD null vectors come with arbitrary sign; pin the gauge so monitors
    # built from them are continuous along a curve
    v = v / np.linalg.norm(v)
    j = int(np.argmax(np.abs(v)))
    return -v if v[j] < 0.0 else v


def _fold_quadratic_coefficient(x: np.ndarray, p: Parameters) -> float:
    """Normal-form quadratic coefficient V.B(U, U) at a det J = 0 point."""
    J = jacobian(x, p)
    U = _canonical(np.linalg.svd(J)[2][-1])
    V = _canonical(np.linalg.svd(J.T)[2][-1])
    H = second_derivative_tensor(x, p)
    return float(V @ multilinear2(H, U, U))


def _monitors(x: np.ndarray, p: Parameters, curve_kind: str) -> dict:
    J = jacobian(x, p)
    c = numerics.char_coeffs(J)
    out = {
        "omega1": c.omega1,
        "omega2": c.omega2,
        "omega3": c.omega3,
        "hopf_margin": c.omega1 * c.omega2 - c.omega3,
    }
    if curve_kind == FOLD:
        out["fold_quadratic"] = _fold_quadratic_coefficient(x, p)
    else:
        try:
            out["first_lyapunov"] = first_lyapunov(Equilibrium(E4_INTERIOR, State(*x), True), p)
        except (NotAHopfPointError, np.linalg.LinAlgError):
            out["first_lyapunov"] = np.nan
    return out


# --- generic predictor-corrector machinery ------------------------------------


def _fd_jacobian(fun, u: np.ndarray) -> np.ndarray:
    f0 = np.atleast_1d(fun(u))
    J = np.empty((len(f0), len(u)))
    for k in range(len(u)):
        h = 1e-7 * (1.0 + abs(u[k]))
        up = u.copy()
        un = u.copy()
        up[k] += h
        un[k] -= h
        J[:, k] = (np.atleast_1d(fun(up)) - np.atleast_1d(fun(un))) / (2.0 * h)
    return J


def _newton_on_curve(fun, u0, tangent, anchor, guard=None, tol=1e-10, max_iter=25):
    """Damped Newton for {fun(u)=0, tangent.(u-anchor)=0}; None on failure."""
    u = u0.copy()
    try:
        fu = np.atleast_1d(fun(u))
    except (ValueError, FloatingPointError, ZeroDivisionError):
        return None
    for _ in range(max_iter):
        g = np.concatenate([fu, [tangent @ (u - anchor)]])
        if not np.all(np.isfinite(g)):
            return None
        if np.max(np.abs(g)) < tol:
            return u
        Jt = np.vstack([_fd_jacobian(fun, u), tangent])
        try:
            step = np.linalg.solve(Jt, -g)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        improved = False
        for _ in range(10):
            trial = u + lam * step
            if guard is not None and not guard(trial):
                lam *= 0.5
                continue
            try:
                ftrial = np.atleast_1d(fun(trial))
            except (ValueError, FloatingPointError, ZeroDivisionError):
                lam *= 0.5
                continue
            gtrial = max(np.max(np.abs(ftrial)), abs(tangent @ (trial - anchor)))
            if np.isfinite(gtrial) and gtrial < max(np.max(np.abs(g)), tol):
                u, fu = trial, ftrial
                improved = True
                break
            lam *= 0.5
        if not improved:
            return None
    g = np.concatenate([fu, [tangent @ (u - anchor)]])
    return u if np.max(np.abs(g)) < 1e-8 else None


def _weights(u: np.ndarray) -> np.ndarray:
    return 1.0 + np.abs(u)


def _trace_component(fun, u0, steps, direction, guard, in_bounds):
    """Walk one direction along {fun(u)=0} from u0 (secant predictor)."""
    pts = [u0.copy()]
    J0 = _fd_jacobian(fun, u0)
    t = np.linalg.svd(J0)[2][-1]
    t = t / np.linalg.norm(t / _weights(u0))
    # orient the start using the requested direction on the last coordinate(s)
    if t[-2] * direction < 0 or (t[-2] == 0 and t[-1] * direction < 0):
        t = -t
    h = 1e-3
    u = u0.copy()
    fails = 0
    while len(pts) < steps:
        w = _weights(u)
        pred = u + h * t * w
        sol = _newton_on_curve(fun, pred, t / w, pred, guard=guard)
        if sol is None:
            fails += 1
            h = h / 2.0
            if h < STEP_MIN or fails > 50:
                break
            continue
        fails = 0
        t_new = (sol - u) / w
        norm = np.linalg.norm(t_new)
        if norm < 1e-14:
            break
        t = t_new / norm
        u = sol
        pts.append(u.copy())
        if not in_bounds(u):
            break
        h = min(h * 1.4, STEP_MAX)
    return pts


def _bisect_monitor_on_curve(fun, monitor_of, ua, ub, guard):
    """Refine a monitor sign change between consecutive curve points."""
    ma = monitor_of(ua)
    for _ in range(60):
        if np.max(np.abs(ua - ub) / _weights(ua)) < MONITOR_TOL:
            break
        w = _weights(ua)
        mid = 0.5 * (ua + ub)
        t = (ub - ua) / w
        nt = np.linalg.norm(t)
        if nt < 1e-15:
            break
        sol = _newton_on_curve(fun, mid, t / nt / w, mid, guard=guard)
        if sol is None:
            break
        mm = monitor_of(sol)
        if not np.isfinite(mm) or ma * mm <= 0.0:
            ub = sol
        else:
            ua, ma = sol, mm
    return 0.5 * (ua + ub)


# --- fold / Hopf curve tracing in the full space --------------------------------


def _test_function(x: np.ndarray, p: Parameters, curve_kind: str) -> float:
    c = numerics.char_coeffs(jacobian(x, p))
    if curve_kind == FOLD:
        return c.omega3
    return c.omega1 * c.omega2 - c.omega3


def _make_augmented(params: Parameters, p1: str, p2: str, curve_kind: str):
    def fun(u):
        x = u[:3]
        p = _params_with(params, p1, u[3], p2, u[4])
        w = rhs(x, p)
        return np.array([w[0], w[1], w[2], _test_function(x, p, curve_kind)])

    def guard(u):
        if u[0] <= 1e-9:  # S must stay positive for the Jacobian
            return False
        if abs(u[1]) < 1e-7 and abs(u[2]) < 1e-7:
            # prey-only states carry their own det J = 0 lines; never let the
            # corrector slide onto that stratum
            return False
        try:
            _params_with(params, p1, u[3], p2, u[4])
        except ValueError:
            return False
        return True

    return fun, guard


def _initial_point(params, curve_kind, p1, p2, seed) -> np.ndarray:
    """Solve the augmented system near the seed, freeing (state, p1).

    A seed sitting exactly on a fold is a double root of the reduced
    nullcline and invisible to the sign-change scan, so interior candidates
    are also collected from slightly perturbed parameter values.
    """
    v1, v2 = float(seed[0]), float(seed[1])
    p = _params_with(params, p1, v1, p2, v2)
    candidates = list(interior_equilibria(p))
    for dv1, dv2 in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        try:
            p_off = _params_with(
                params,
                p1,
                v1 + dv1 * 1e-3 * (1.0 + abs(v1)),
                p2,
                v2 + dv2 * 1e-3 * (1.0 + abs(v2)),
            )
        except ValueError:
            continue
        candidates.extend(interior_equilibria(p_off))
    candidates += [
        eq
        for eq in boundary_equilibria(p)
        if eq.point.S > 0
        and all(np.isfinite(eq.point))
        and not (abs(eq.point.I) < 1e-12 and abs(eq.point.P) < 1e-12)
    ]
    if not candidates:
        raise CurveTraceError("no equilibrium near the seed")
    best = min(candidates, key=lambda e: abs(_test_function(np.asarray(e.point), p, curve_kind)))
    u = np.array([*best.point, v1, v2])
    fun, guard = _make_augmented(params, p1, p2, curve_kind)
    t = np.array([0.0, 0.0, 0.0, 0.0, 1.0])
    sol = _newton_on_curve(fun, u, t, u, guard=guard)
    if sol is None or abs(sol[3] - v1) > 0.25 * (1.0 + abs(v1)):
        raise CurveTraceError(f"seed ({v1}, {v2}) is not near a codim-1 {curve_kind} locus")
    return sol


def _verified_event(u, params, p1, p2, curve_kind, name, branch, bracket_mag) -> Codim2Point | None:
    """Build a codim-2 point, rejecting spurious monitor sign flips."""
    p = _params_with(params, p1, u[3], p2, u[4])
    x = u[:3]
    mons = _monitors(x, p, curve_kind)
    m = mons[name]
    if not np.isfinite(m) or abs(m) > 0.05 * bracket_mag + 1e-6:
        return None
    J = jacobian(x, p)
    eigs = numerics.eig3(J)
    c = numerics.char_coeffs(J)
    kind = _MONITOR_KIND[name]
    if kind == ZERO_HOPF and c.omega2 <= 0.0:
        # omega1 crossing with omega2 < 0 is a neutral saddle, not zero-Hopf
        return None
    feas = bool(all(v >= -1e-9 for v in x))
    if abs(x[2]) < 1e-6:
        # the localized state sits on the predator-free branch regardless of
        # which component carried the monitor (they meet at P = 0)
        branch = "predator_free"
    eq_kind = E2_PREDATOR_FREE if branch == "predator_free" else E4_INTERIOR
    return Codim2Point(
        kind=kind,
        p1=float(u[3]),
        p2=float(u[4]),
        equilibrium=Equilibrium(eq_kind, State(*x), feas),
        eigenvalues=eigs,
        feasible=feas,
        branch=branch,
        diagnostics={"monitor": name, "monitor_value": m, "omega1": c.omega1,
                     "omega2": c.omega2, "omega3": c.omega3},
    )


def trace_curve(
    params: Parameters,
    kind: str,
    p1: str,
    p2: str,
    start,
    steps: int = 400,
    bound_factor: float = 10.0,
) -> tuple[list[CurvePoint], list[Codim2Point]]:
    """Trace a fold or Hopf locus in the (p1, p2) plane from a codim-1 seed.

    Both directions from the seed are walked until `steps` points, corrector
    failure, or the parameters leave a box of `bound_factor * (1 + |seed|)`
    around the seed.  Monitor sign changes (second eigenvalue for BT,
    zero-eigenvalue indicator for ZH, fold quadratic coefficient for cusps,
    first Lyapunov coefficient for GH) are localized along the curve;
    infeasible codim-2 points are reported with feasible=False, not dropped.
    """
    if kind not in (FOLD, HOPF_CURVE):
        raise ValueError(f"curve kind must be 'fold' or 'hopf', got {kind!r}")
    for name in (p1, p2):
        if name not in PARAMETER_NAMES:
            raise ValueError(f"unknown parameter {name!r}")

    u0 = _initial_point(params, kind, p1, p2, start)
    lim1 = bound_factor * (1.0 + abs(u0[3]))
    lim2 = bound_factor * (1.0 + abs(u0[4]))

    def in_bounds(u):
        return (
            abs(u[3] - u0[3]) <= lim1
            and abs(u[4] - u0[4]) <= lim2
            and np.max(np.abs(u[:3])) <= 1e3
        )

    fun, guard = _make_augmented(params, p1, p2, kind)
    pts_fwd = _trace_component(fun, u0, steps, +1.0, guard, in_bounds)
    pts_bwd = _trace_component(fun, u0, steps, -1.0, guard, in_bounds)
    chain = list(reversed(pts_bwd[1:])) + pts_fwd

    curve: list[CurvePoint] = []
    for u in chain:
        p = _params_with(params, p1, u[3], p2, u[4])
        feas = bool(all(v >= 0.0 for v in u[:3]))
        curve.append(
            CurvePoint(
                p1=float(u[3]),
                p2=float(u[4]),
                equilibrium=Equilibrium(E4_INTERIOR, State(*u[:3]), feas),
                curve_kind=kind,
                branch="interior",
                monitors=_monitors(u[:3], p, kind),
            )
        )

    names = ("omega2", "fold_quadratic", "omega1") if kind == FOLD else ("omega1", "first_lyapunov")
    events: list[Codim2Point] = []
    for name in names:

        def monitor_of(u):
            return _monitors(u[:3], _params_with(params, p1, u[3], p2, u[4]), kind)[name]

        vals = [cp.monitors.get(name, np.nan) for cp in curve]
        for i in range(len(curve) - 1):
            a, b = vals[i], vals[i + 1]
            if not (np.isfinite(a) and np.isfinite(b)) or not (a * b < 0.0):
                continue
            u_loc = _bisect_monitor_on_curve(fun, monitor_of, chain[i], chain[i + 1], guard)
            ev = _verified_event(u_loc, params, p1, p2, kind, name, "interior",
                                 max(abs(a), abs(b)))
            if ev is not None:
                events.append(ev)

    if kind == FOLD:
        locus_pts, locus_events = _predator_free_fold_locus(
            params, p1, p2, chain, steps, in_bounds
        )
        curve.extend(locus_pts)
        events.extend(locus_events)

    return _dedupe_points(events, curve)


def _dedupe_points(events: list[Codim2Point], curve: list[CurvePoint]):
    kept: list[Codim2Point] = []
    for ev in events:
        if not any(
            k.kind == ev.kind and abs(k.p1 - ev.p1) < 1e-4 and abs(k.p2 - ev.p2) < 1e-4
            for k in kept
        ):
            kept.append(ev)
    return curve, kept


# --- predator-free fold locus --------------------------------------------------


def _predator_free_fold_locus(params, p1, p2, chain, steps, in_bounds):
    """Continue the predator-free det J = 0 locus from P = 0 crossings.

    On the predator-free branch the determinant vanishes where the
    predator-invasion eigenvalue C33 does; the interior fold curve meets
    this locus exactly where its P coordinate crosses zero, which provides
    the seeds.
    """
    seeds = []
    for i in range(len(chain) - 1):
        pa, pb = chain[i][2], chain[i + 1][2]
        if pa == 0.0 or pa * pb < 0.0:
            w = abs(pa) / (abs(pa) + abs(pb)) if (abs(pa) + abs(pb)) > 0 else 0.5
            seeds.append((1 - w) * chain[i][3:] + w * chain[i + 1][3:])
    if not seeds:
        return [], []

    def c33(u):
        p = _params_with(params, p1, u[0], p2, u[1])
        S2, I2 = predator_free_coordinates(p)
        if not np.isfinite(I2):
            raise ValueError("predator-free equilibrium pole")
        return np.array([-p.a2 + p.d2 * S2**p.r + p.d3 * I2])

    def guard(u):
        try:
            p = _params_with(params, p1, u[0], p2, u[1])
        except ValueError:
            return False
        S2, I2 = predator_free_coordinates(p)
        return S2 > 0.0 and np.isfinite(I2)

    def locus_bounds(u):
        return in_bounds(np.array([1.0, 1.0, 1.0, u[0], u[1]]))

    def state_at(u):
        p = _params_with(params, p1, u[0], p2, u[1])
        S2, I2 = predator_free_coordinates(p)
        return np.array([S2, I2, 0.0]), p

    pts: list[CurvePoint] = []
    events: list[Codim2Point] = []
    seen_seeds: list[np.ndarray] = []
    for seed in seeds:
        if any(np.max(np.abs(seed - s)) < 1e-3 for s in seen_seeds):
            continue
        seen_seeds.append(seed)
        u0 = _newton_on_curve(c33, np.asarray(seed, dtype=float),
                              np.array([0.0, 1.0]), np.asarray(seed, dtype=float),
                              guard=guard)
        if u0 is None:
            continue
        fwd = _trace_component(c33, u0, steps, +1.0, guard, locus_bounds)
        bwd = _trace_component(c33, u0, steps, -1.0, guard, locus_bounds)
        locus_chain = list(reversed(bwd[1:])) + fwd

        def monitor_of_name(name):
            def monitor_of(u):
                x, p = state_at(u)
                return _monitors(x, p, FOLD)[name]

            return monitor_of

        mons_chain = []
        for u in locus_chain:
            x, p = state_at(u)
            mons = _monitors(x, p, FOLD)
            mons_chain.append(mons)
            pts.append(
                CurvePoint(
                    p1=float(u[0]),
                    p2=float(u[1]),
                    equilibrium=Equilibrium(E2_PREDATOR_FREE, State(*x), bool(x[1] > 0.0)),
                    curve_kind=FOLD,
                    branch="predator_free",
                    monitors=mons,
                )
            )
        for name in ("fold_quadratic", "omega2", "omega1"):
            monitor_of = monitor_of_name(name)
            for i in range(len(locus_chain) - 1):
                a = mons_chain[i].get(name, np.nan)
                b = mons_chain[i + 1].get(name, np.nan)
                if not (np.isfinite(a) and np.isfinite(b)) or not (a * b < 0.0):
                    continue
                u_loc = _bisect_monitor_on_curve(
                    c33, monitor_of, locus_chain[i], locus_chain[i + 1], guard
                )
                x, p = state_at(u_loc)
                u5 = np.array([*x, u_loc[0], u_loc[1]])
                ev = _verified_event(u5, params, p1, p2, FOLD, name, "predator_free",
                                     max(abs(a), abs(b)))
                if ev is not None:
                    events.append(ev)
    return pts, events


# --- closed-form anchored zero-Hopf solve --------------------------------------


def solve_zh_on_boundary(params: Parameters, p1: str, p2: str, seed) -> Codim2Point:
    """Zero-Hopf point on the predator-free branch by damped Newton.

    The predator-free Jacobian has eigenvalues C33 and the roots of
    lambda^2 - C11*lambda - C12*C21; a zero-Hopf needs C11 = 0 = C33 with
    -C12*C21 > 0 (a genuine imaginary pair).  This is an independent,
    closed-form-anchored cross-check of the curve tracer's ZH detection.
    """
    for name in (p1, p2):
        if name not in PARAMETER_NAMES:
            raise ValueError(f"unknown parameter {name!r}")

    def system(v: np.ndarray) -> np.ndarray:
        p = _params_with(params, p1, v[0], p2, v[1])
        S2, I2 = predator_free_coordinates(p)
        if S2 <= 0.0 or not np.isfinite(I2):
            raise ValueError("predator-free equilibrium undefined here")
        J = jacobian((S2, I2, 0.0), p)
        return np.array([J[0, 0], J[2, 2]])

    v = np.array([float(seed[0]), float(seed[1])])
    fv = system(v)
    converged = False
    for _ in range(80):
        if np.max(np.abs(fv)) < 1e-12:
            converged = True
            break
        Jm = _fd_jacobian(system, v)
        try:
            step = np.linalg.solve(Jm, -fv)
        except np.linalg.LinAlgError as exc:
            raise CurveTraceError("singular system in zero-Hopf solve") from exc
        lam = 1.0
        improved = False
        for _ in range(12):
            trial = v + lam * step
            try:
                ftrial = system(trial)
            except (ValueError, FloatingPointError):
                lam *= 0.5
                continue
            if np.max(np.abs(ftrial)) < np.max(np.abs(fv)):
                v, fv = trial, ftrial
                improved = True
                break
            lam *= 0.5
        if not improved:
            raise CurveTraceError("zero-Hopf Newton iteration stalled")
    if not converged and np.max(np.abs(fv)) >= 1e-10:
        raise CurveTraceError("zero-Hopf Newton did not converge")

    p = _params_with(params, p1, v[0], p2, v[1])
    S2, I2 = predator_free_coordinates(p)
    J = jacobian((S2, I2, 0.0), p)
    pair_product = -J[0, 1] * J[1, 0]
    if pair_product <= 0.0:
        raise CurveTraceError(
            f"no imaginary pair at the solution: -C12*C21 = {pair_product:.3g} <= 0"
        )
    point = State(S2, I2, 0.0)
    return Codim2Point(
        kind=ZERO_HOPF,
        p1=float(v[0]),
        p2=float(v[1]),
        equilibrium=Equilibrium(E2_PREDATOR_FREE, point, bool(I2 > 0.0)),
        eigenvalues=numerics.eig3(J),
        feasible=bool(I2 >= 0.0),
        branch="predator_free",
        diagnostics={"omega": float(np.sqrt(pair_product))},
    )
