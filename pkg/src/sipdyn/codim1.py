"""One-parameter bifurcation sweeps: equilibrium branches with stability
flags plus detected saddle-node, Hopf and transcritical points.

Branches are recomputed per parameter value rather than continued by
pseudo-arclength: the interior problem reduces to one-dimensional
rootfinding in S, so dense re-solving is cheap and robust through folds.
Sign changes of the test functions (omega3 for folds and boundary
eigenvalue crossings, omega1*omega2 - omega3 with omega2 > 0 for Hopf) are
localized by bisection in the parameter; interior folds are then polished
on the double-root system {g = 0, dg/dS = 0}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels, numerics
from .equilibria import (
    E1_K,
    E1_L,
    E2_PREDATOR_FREE,
    E3_INFECTION_FREE,
    E4_INTERIOR,
    Equilibrium,
    StabilityReport,
    boundary_equilibria,
    classify,
    interior_coordinates,
    interior_equilibria,
    interior_window,
)
from .model import (
    PARAMETER_NAMES,
    Parameters,
    State,
    jacobian,
    jacobian_parameter_derivative,
    multilinear2,
    multilinear3,
    rhs_parameter_derivative,
    second_derivative_tensor,
    third_derivative_tensor,
)

__all__ = [
    "SADDLE_NODE",
    "HOPF",
    "TRANSCRITICAL",
    "Branch",
    "BifurcationEvent",
    "NotAHopfPointError",
    "sweep",
    "first_lyapunov",
    "transversality_report",
]

SADDLE_NODE = "saddle_node"
HOPF = "hopf"
TRANSCRITICAL = "transcritical"

#: bisection tolerance on the parameter for event localization
LOCATE_TOL = 1e-8
#: matching radius for nearest-neighbor linking of interior branches
LINK_TOL = 0.35


class NotAHopfPointError(ValueError):
    """The Jacobian has no pure-imaginary eigenvalue pair at the point."""


@dataclass(frozen=True)
class Branch:
    """Samples of one equilibrium branch along the swept parameter."""

    parameter: str
    kind: str
    branch_id: int
    values: np.ndarray
    equilibria: list[Equilibrium]
    reports: list[StabilityReport | None]


@dataclass(frozen=True)
class BifurcationEvent:
    kind: str
    parameter: str
    value: float
    equilibrium: Equilibrium
    diagnostics: dict = field(default_factory=dict)


def _params_at(params: Parameters, which: str, value: float) -> Parameters:
    return params.replace_unboxed(**{which: value})


def _boundary_point(params: Parameters, kind: str) -> Equilibrium | None:
    for eq in boundary_equilibria(params):
        if eq.kind == kind:
            if not all(np.isfinite(eq.point)):
                return None
            return eq
    return None


def _safe_classify(eq: Equilibrium, params: Parameters) -> StabilityReport | None:
    if not eq.feasible or eq.point.S <= 0.0:
        return None
    try:
        return classify(eq, params)
    except Exception:
        return None


def _char_at(eq: Equilibrium, params: Parameters) -> numerics.CubicCoefficients | None:
    if eq.point.S <= 0.0 or not all(np.isfinite(eq.point)):
        return None
    return numerics.char_coeffs(jacobian(eq.point, params))


def _hopf_margin(c: numerics.CubicCoefficients) -> float:
    return c.omega1 * c.omega2 - c.omega3


def _bisect_on_parameter(f, lo: float, hi: float, flo: float) -> float:
    while hi - lo > LOCATE_TOL:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _nearest_interior(params: Parameters, target: np.ndarray) -> Equilibrium | None:
    eqs = interior_equilibria(params)
    if not eqs:
        return None
    dists = [np.max(np.abs(np.asarray(eq.point) - target)) for eq in eqs]
    return eqs[int(np.argmin(dists))]


def _fold_polish(params: Parameters, which: str, v0: float, s0: float):
    """Newton refinement of the double-root system {g=0, dg/dS=0} in (S, v)."""

    def g(s, v):
        return _kernels.nullcline_residual(s, _params_at(params, which, v).as_tuple())

    def system(s, v):
        hs = 1e-7 * (1.0 + abs(s))
        g0 = g(s, v)
        gp = (g(s + hs, v) - g(s - hs, v)) / (2.0 * hs)
        return np.array([g0, gp])

    u = np.array([s0, v0])
    fu = system(*u)
    for _ in range(60):
        if np.max(np.abs(fu)) < 1e-13:
            break
        hs = 1e-7 * (1.0 + abs(u[0]))
        hv = 1e-7 * (1.0 + abs(u[1]))
        Jm = np.empty((2, 2))
        Jm[:, 0] = (system(u[0] + hs, u[1]) - system(u[0] - hs, u[1])) / (2.0 * hs)
        Jm[:, 1] = (system(u[0], u[1] + hv) - system(u[0], u[1] - hv)) / (2.0 * hv)
        try:
            step = np.linalg.solve(Jm, -fu)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        for _ in range(8):
            trial = u + lam * step
            ftrial = system(*trial)
            if np.max(np.abs(ftrial)) < np.max(np.abs(fu)):
                u, fu = trial, ftrial
                break
            lam *= 0.5
        else:
            break
    return float(u[0]), float(u[1])


def _match_roots(prev: list[float], new: list[float], tol: float) -> list[int]:
    """Greedy nearest matching; returns for each new root the prev index or -1."""
    assigned = [-1] * len(new)
    taken = set()
    order = sorted(
        ((abs(n - p), i, j) for i, n in enumerate(new) for j, p in enumerate(prev)),
        key=lambda t: t[0],
    )
    for dist, i, j in order:
        if dist > tol or assigned[i] != -1 or j in taken:
            continue
        assigned[i] = j
        taken.add(j)
    return assigned


def sweep(
    params: Parameters,
    which: str,
    lo: float,
    hi: float,
    n: int,
) -> tuple[list[Branch], list[BifurcationEvent]]:
    """Sweep one parameter over [lo, hi] on an n-point grid.

    Returns (branches, events).  Boundary branches are tracked through
    feasibility changes (infeasible samples keep their flag and carry no
    stability report); interior branches are linked by nearest-neighbor
    continuation in state space.
    """
    if which not in PARAMETER_NAMES:
        raise ValueError(f"unknown parameter {which!r}")
    if not (lo < hi):
        raise ValueError(f"empty parameter range [{lo}, {hi}]")
    if n < 3:
        raise ValueError("need at least 3 grid points")

    values = np.linspace(lo, hi, n)
    grids: list[Parameters] = [_params_at(params, which, float(v)) for v in values]

    branches: list[Branch] = []
    events: list[BifurcationEvent] = []
    next_id = 0

    # --- boundary branches -------------------------------------------------
    for kind in (E1_K, E1_L, E2_PREDATOR_FREE, E3_INFECTION_FREE):
        eqs: list[Equilibrium] = []
        reports: list[StabilityReport | None] = []
        chars: list[numerics.CubicCoefficients | None] = []
        for p in grids:
            eq = _boundary_point(p, kind)
            if eq is None:
                eq = Equilibrium(kind, State(np.nan, np.nan, np.nan), False)
            eqs.append(eq)
            reports.append(_safe_classify(eq, p))
            chars.append(_char_at(eq, p))
        branches.append(Branch(which, kind, next_id, values, eqs, reports))
        next_id += 1
        events.extend(_boundary_events(params, which, kind, values, chars))

    # --- interior branches --------------------------------------------------
    open_branches: list[dict] = []
    closed: list[dict] = []
    counts: list[int] = []
    roots_per_value: list[list[float]] = []
    for iv, p in enumerate(grids):
        ints = interior_equilibria(p)
        roots = [eq.point.S for eq in ints]
        roots_per_value.append(roots)
        counts.append(len(roots))
        prev_roots = [b["eqs"][-1].point.S for b in open_branches]
        assigned = _match_roots(prev_roots, roots, LINK_TOL)
        still_open: list[dict] = []
        used = set()
        for i, eq in enumerate(ints):
            j = assigned[i]
            if j >= 0:
                b = open_branches[j]
                used.add(j)
            else:
                b = {"start": iv, "vals": [], "eqs": [], "reports": []}
            b["vals"].append(float(values[iv]))
            b["eqs"].append(eq)
            b["reports"].append(_safe_classify(eq, p))
            still_open.append(b)
        for j, b in enumerate(open_branches):
            if j not in used:
                closed.append(b)
        open_branches = still_open
    closed.extend(open_branches)
    for b in closed:
        branches.append(
            Branch(which, E4_INTERIOR, next_id, np.array(b["vals"]), b["eqs"], b["reports"])
        )
        next_id += 1

    # Hopf points: sign change of omega1*omega2 - omega3 along interior branches
    for b in closed:
        events.extend(_interior_hopf_events(params, which, b))
    # folds: interior root-count changes that are not window-edge transits
    events.extend(_fold_events(params, which, values, counts, roots_per_value))

    events = _dedupe_events(events)
    events.sort(key=lambda e: e.value)
    return branches, events


def _boundary_events(params, which, kind, values, chars) -> list[BifurcationEvent]:
    out: list[BifurcationEvent] = []

    def char_at_value(v: float) -> numerics.CubicCoefficients | None:
        p = _params_at(params, which, v)
        eq = _boundary_point(p, kind)
        if eq is None:
            return None
        return _char_at(eq, p)

    for i in range(len(values) - 1):
        ca, cb = chars[i], chars[i + 1]
        if ca is None or cb is None:
            continue
        # transcritical: a real eigenvalue of the boundary state crosses zero
        if ca.omega3 * cb.omega3 < 0.0:
            v = _bisect_on_parameter(
                lambda x: (char_at_value(x) or ca).omega3, float(values[i]), float(values[i + 1]), ca.omega3
            )
            p = _params_at(params, which, v)
            eq = _boundary_point(p, kind)
            if eq is not None:
                J = jacobian(eq.point, p)
                eigs = numerics.eig3(J)
                lam_min = min(eigs, key=lambda z: abs(z))
                out.append(
                    BifurcationEvent(
                        TRANSCRITICAL,
                        which,
                        v,
                        eq,
                        {
                            "branch": kind,
                            "omega3": numerics.char_coeffs(J).omega3,
                            "eigenvalues": eigs,
                            "zero_eigenvalue": lam_min,
                        },
                    )
                )
        # boundary Hopf: Routh-Hurwitz margin crosses with omega2 > 0
        if _hopf_margin(ca) * _hopf_margin(cb) < 0.0:
            v = _bisect_on_parameter(
                lambda x: _hopf_margin(char_at_value(x) or ca),
                float(values[i]),
                float(values[i + 1]),
                _hopf_margin(ca),
            )
            p = _params_at(params, which, v)
            eq = _boundary_point(p, kind)
            if eq is None:
                continue
            c = _char_at(eq, p)
            if c is None or c.omega2 <= 0.0:
                continue
            out.append(_make_hopf_event(which, v, eq, p, c, branch=kind))
    return out


def _make_hopf_event(which, v, eq, p, c, branch) -> BifurcationEvent:
    J = jacobian(eq.point, p)
    eigs = numerics.eig3(J)
    diag = {
        "branch": branch,
        "hopf_margin": _hopf_margin(c),
        "omega2": c.omega2,
        "eigenvalues": eigs,
        "omega": float(np.sqrt(max(c.omega2, 0.0))),
    }
    try:
        diag["first_lyapunov"] = first_lyapunov(eq, p)
    except Exception as exc:  # degenerate pair right at detection tolerance
        diag["first_lyapunov_error"] = str(exc)
    return BifurcationEvent(HOPF, which, v, eq, diag)


def _interior_hopf_events(params, which, b) -> list[BifurcationEvent]:
    out: list[BifurcationEvent] = []
    vals = b["vals"]
    margins = []
    for eq, v in zip(b["eqs"], vals):
        c = _char_at(eq, _params_at(params, which, v))
        margins.append(None if c is None else _hopf_margin(c))
    for i in range(len(vals) - 1):
        ma, mb = margins[i], margins[i + 1]
        if ma is None or mb is None or not (ma * mb < 0.0):
            continue
        pa = np.asarray(b["eqs"][i].point, dtype=float)
        pb = np.asarray(b["eqs"][i + 1].point, dtype=float)

        def margin_at(v: float) -> float:
            w = (v - vals[i]) / (vals[i + 1] - vals[i])
            eq = _nearest_interior(_params_at(params, which, v), (1 - w) * pa + w * pb)
            if eq is None:
                return ma
            c = _char_at(eq, _params_at(params, which, v))
            return ma if c is None else _hopf_margin(c)

        v = _bisect_on_parameter(margin_at, vals[i], vals[i + 1], ma)
        p = _params_at(params, which, v)
        eq = _nearest_interior(p, 0.5 * (pa + pb))
        if eq is None:
            continue
        c = _char_at(eq, p)
        if c is None or c.omega2 <= 0.0:
            continue
        out.append(_make_hopf_event(which, v, eq, p, c, branch="interior"))
    return out


def _fold_events(params, which, values, counts, roots_per_value) -> list[BifurcationEvent]:
    out: list[BifurcationEvent] = []
    for i in range(len(values) - 1):
        if counts[i] == counts[i + 1]:
            continue
        v_many, v_few = float(values[i]), float(values[i + 1])
        roots_many = roots_per_value[i]
        if counts[i] < counts[i + 1]:
            v_many, v_few = v_few, v_many
            roots_many = roots_per_value[i + 1]
        n_many = max(counts[i], counts[i + 1])

        def count_at(v: float) -> int:
            return len(interior_equilibria(_params_at(params, which, v)))

        # bisect the parameter interval on the root count
        lo, hi = (v_many, v_few) if v_many < v_few else (v_few, v_many)
        lo_is_many = count_at(lo) == n_many
        for _ in range(40):
            if hi - lo <= 1e-9:
                break
            mid = 0.5 * (lo + hi)
            if (count_at(mid) == n_many) == lo_is_many:
                lo = mid
            else:
                hi = mid
        v_star = lo if lo_is_many else hi
        roots_star = interior_equilibria(_params_at(params, which, v_star))
        roots_s = sorted(eq.point.S for eq in roots_star) or sorted(roots_many)
        window = interior_window(_params_at(params, which, v_star))
        if window is None or len(roots_s) == 0:
            continue
        w_lo, w_hi = window
        span = w_hi - w_lo
        # identify the vanishing pair; a single root walking to the window
        # edge is a transcritical transit handled on the boundary branches
        gaps = [roots_s[k + 1] - roots_s[k] for k in range(len(roots_s) - 1)]
        edge = min(roots_s[0] - w_lo, w_hi - roots_s[-1])
        if gaps and min(gaps) < max(0.05 * span, 2.0 * edge):
            k = int(np.argmin(gaps))
            s_seed = 0.5 * (roots_s[k] + roots_s[k + 1])
        elif edge < 0.05 * span:
            continue
        elif len(roots_s) == 1:
            s_seed = roots_s[0]
        else:
            continue
        s_star, v_fold = _fold_polish(params, which, 0.5 * (lo + hi), s_seed)
        if not (min(values) - 1e-6 <= v_fold <= max(values) + 1e-6):
            continue
        p = _params_at(params, which, v_fold)
        point = interior_coordinates(s_star, p)
        eq = Equilibrium(E4_INTERIOR, point, all(v > 0.0 for v in point))
        J = jacobian(point, p)
        c = numerics.char_coeffs(J)
        out.append(
            BifurcationEvent(
                SADDLE_NODE,
                which,
                v_fold,
                eq,
                {
                    "branch": "interior",
                    "omega3": c.omega3,
                    "eigenvalues": numerics.eig3(J),
                },
            )
        )
    return out


def _dedupe_events(events: list[BifurcationEvent]) -> list[BifurcationEvent]:
    kept: list[BifurcationEvent] = []
    for ev in sorted(events, key=lambda e: (e.kind, e.value)):
        dup = any(
            k.kind == ev.kind and abs(k.value - ev.value) < 1e-6 for k in kept
        )
        if not dup:
            kept.append(ev)
    return kept


# --- Hopf criticality -------------------------------------------------------


def _hopf_eigensystem(J: np.ndarray):
    eigs = numerics.eig3(J)
    pair = [z for z in eigs if z.imag > 0.0]
    if not pair:
        raise NotAHopfPointError("no complex eigenvalue pair")
    lam = max(pair, key=lambda z: z.imag)
    omega = lam.imag
    if abs(lam.real) > 1e-4 * (1.0 + omega):
        raise NotAHopfPointError(
            f"complex pair {lam:.6g} is not purely imaginary (|Re| > 1e-4 scale)"
        )
    lam3 = [z for z in eigs if z != lam and z != lam.conjugate()]
    if not lam3 or abs(lam3[0]) < 1e-10:
        raise NotAHopfPointError("third eigenvalue is zero; the point is degenerate")
    return omega


def _null_vector(M: np.ndarray) -> np.ndarray:
    _, _, vh = np.linalg.svd(M)
    return vh[-1].conj()


def first_lyapunov(eq: Equilibrium, params: Parameters, _q_scale: float = 1.0) -> float:
    """First Lyapunov coefficient at a Hopf point by the projection method.

    Positive means subcritical, negative supercritical; the magnitude is
    normalization dependent and only useful as a diagnostic.  Raises
    :class:`NotAHopfPointError` when the Jacobian has no pure-imaginary
    pair (within tolerance) or the third eigenvalue vanishes.
    """
    x = np.asarray(eq.point, dtype=float)
    J = jacobian(x, params)
    omega = _hopf_eigensystem(J)

    q = _null_vector(J - 1j * omega * np.eye(3)) * _q_scale
    p = _null_vector(J.T + 1j * omega * np.eye(3))
    p = p / np.vdot(p, q).conjugate()

    H = second_derivative_tensor(x, params)
    T = third_derivative_tensor(x, params)
    qb = q.conj()
    b_qq = multilinear2(H, q, q)
    b_qqb = multilinear2(H, q, qb)
    c_qqqb = multilinear3(T, q, q, qb)

    s1 = np.linalg.solve(J, b_qqb)
    s2 = np.linalg.solve(2j * omega * np.eye(3) - J, b_qq)
    val = (
        np.vdot(p, c_qqqb)
        - 2.0 * np.vdot(p, multilinear2(H, q, s1))
        + np.vdot(p, multilinear2(H, qb, s2))
    )
    return float(val.real / (2.0 * omega))


# --- transversality ----------------------------------------------------------


def _equilibrium_near(params: Parameters, kind: str, target) -> Equilibrium | None:
    if kind == E4_INTERIOR:
        return _nearest_interior(params, np.asarray(target, dtype=float))
    return _boundary_point(params, kind)


def transversality_report(event: BifurcationEvent, params: Parameters) -> dict:
    """Genericity quantities for a localized bifurcation event.

    For a saddle-node: the two Sotomayor quantities V.W_p and V.D2W(U,U)
    with their nonzero flags.  For a Hopf: the eigenvalue crossing speed
    d(Re lambda)/dp by finite differences, cross-checked against the
    characteristic-coefficient expression.  For a transcritical: the three
    Sotomayor quantities plus the crossing speed of the zero eigenvalue.
    """
    which = event.parameter
    v0 = event.value
    p0 = _params_at(params, which, v0)
    eq = event.equilibrium
    x = np.asarray(eq.point, dtype=float)
    J = jacobian(x, p0)

    if event.kind == SADDLE_NODE:
        svals = np.linalg.svd(J, compute_uv=False)
        if svals[-2] < 1e-12 * max(1.0, svals[0]):
            raise ValueError("degenerate null space: two near-zero singular values")
        U = _null_vector(J).real
        V = _null_vector(J.T).real
        U /= np.linalg.norm(U)
        V /= np.linalg.norm(V)
        w_p = rhs_parameter_derivative(x, p0, which)
        H = second_derivative_tensor(x, p0)
        a1 = float(V @ w_p)
        a2 = float(V @ multilinear2(H, U, U))
        return {
            "kind": SADDLE_NODE,
            "v_dot_w_p": a1,
            "v_dot_w_p_nonzero": abs(a1) > 1e-6,
            "v_dot_d2w_uu": a2,
            "v_dot_d2w_uu_nonzero": abs(a2) > 1e-6,
        }

    if event.kind == HOPF:
        delta = 1e-5 * (1.0 + abs(v0))

        def pair_real(v: float) -> float:
            p = _params_at(params, which, v)
            eqv = _equilibrium_near(p, eq.kind, x)
            if eqv is None:
                raise ValueError("lost the branch while differentiating")
            eigs = numerics.eig3(jacobian(eqv.point, p))
            pair = [z for z in eigs if z.imag > 1e-8]
            if not pair:
                raise ValueError("complex pair vanished while differentiating")
            return max(pair, key=lambda z: z.imag).real

        speed_fd = (pair_real(v0 + delta) - pair_real(v0 - delta)) / (2.0 * delta)

        def coeffs(v: float) -> numerics.CubicCoefficients:
            p = _params_at(params, which, v)
            eqv = _equilibrium_near(p, eq.kind, x)
            return numerics.char_coeffs(jacobian(eqv.point, p))

        ca, cb = coeffs(v0 - delta), coeffs(v0 + delta)
        c0 = coeffs(v0)
        d1 = (cb.omega1 - ca.omega1) / (2.0 * delta)
        d2 = (cb.omega2 - ca.omega2) / (2.0 * delta)
        d3 = (cb.omega3 - ca.omega3) / (2.0 * delta)
        speed_coeff = (d3 - c0.omega2 * d1 - c0.omega1 * d2) / (
            2.0 * (c0.omega2 + c0.omega1**2)
        )
        return {
            "kind": HOPF,
            "crossing_speed": speed_fd,
            "crossing_speed_nonzero": abs(speed_fd) > 1e-6,
            "crossing_speed_from_coefficients": speed_coeff,
        }

    if event.kind == TRANSCRITICAL:
        X1 = _null_vector(J).real
        X2 = _null_vector(J.T).real
        X1 /= np.linalg.norm(X1)
        X2 /= np.linalg.norm(X2)
        w_p = rhs_parameter_derivative(x, p0, which)
        dJ = jacobian_parameter_derivative(x, p0, which)
        H = second_derivative_tensor(x, p0)
        q1 = float(X2 @ w_p)
        q2 = float(X2 @ (dJ @ X1))
        q3 = float(X2 @ multilinear2(H, X1, X1))
        delta = 1e-5 * (1.0 + abs(v0))

        def zero_eig(v: float) -> float:
            p = _params_at(params, which, v)
            eqv = _equilibrium_near(p, eq.kind, x)
            eigs = numerics.eig3(jacobian(eqv.point, p))
            reals = [z.real for z in eigs]
            return min(reals, key=abs)

        speed = (zero_eig(v0 + delta) - zero_eig(v0 - delta)) / (2.0 * delta)
        return {
            "kind": TRANSCRITICAL,
            "x2_dot_w_p": q1,
            "x2_dot_w_p_zero": abs(q1) <= 1e-6,
            "x2_dot_dw_p_x1": q2,
            "x2_dot_dw_p_x1_nonzero": abs(q2) > 1e-6,
            "x2_dot_d2w_x1x1": q3,
            "x2_dot_d2w_x1x1_nonzero": abs(q3) > 1e-6,
            "zero_eigenvalue_crossing_speed": speed,
        }

    raise ValueError(f"unknown event kind {event.kind!r}")
