"""Pure-Python kernels: adaptive Dormand-Prince 5(4) integration with
extinction clamping, and the interior-nullcline root scan.

This is the fallback backend; `sipdyn._kernels._core` implements the same
algorithms in Cython with identical coefficients and branching so the two
backends agree to floating-point noise.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "pure"

# termination reason codes shared with the compiled backend
REASON_T_END = 0
REASON_ALL_EXTINCT = 1
REASON_CONVERGED = 2
REASON_UNDERFLOW = 3
REASON_STEP_LIMIT = 4

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_A71, _A73, _A74, _A75, _A76 = (
    35.0 / 384.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
)
# embedded error coefficients (5th-order minus 4th-order weights)
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)
# dense-output coefficients
_D1 = -12715105075.0 / 11282082432.0
_D3 = 87487479700.0 / 32700410799.0
_D4 = -10690763975.0 / 1880347072.0
_D5 = 701980252875.0 / 199316789632.0
_D6 = -1453857185.0 / 822651844.0
_D7 = 69997945.0 / 29380423.0


def _powr(s: float, r: float) -> float:
    return s**r if s > 0.0 else 0.0


def _rhs(y, p):
    S, I, P = y
    a0, a1, a2, d0, d1, d2, d3, e0, K, L, r = p
    sr = _powr(S, r)
    return (
        a0 * S * (1.0 - (S + I) / K) * (S - L) - d0 * sr * P - e0 * S * I,
        -a1 * I + e0 * S * I - d1 * I * P,
        -a2 * P + d2 * sr * P + d3 * I * P,
    )


def nullcline_residual(S: float, p) -> float:
    """Susceptible-nullcline residual g(S) after eliminating I and P."""
    a0, a1, a2, d0, d1, d2, d3, e0, K, L, r = p
    sr = _powr(S, r)
    i_star = (a2 - d2 * sr) / d3
    p_star = (e0 * S - a1) / d1
    return a0 * (1.0 - (S + i_star) / K) * (S - L) - d0 * (sr / S) * p_star - e0 * i_star


def nullcline_root_scan(p, lo: float, hi: float, n: int, tol: float) -> list:
    """Sign-change roots of the nullcline residual on [lo, hi] (grid + bisection)."""
    if not (lo < hi) or n < 2:
        return []
    step = (hi - lo) / (n - 1)
    roots = []
    f_prev = nullcline_residual(lo, p)
    x_prev = lo
    for i in range(1, n):
        x = lo + i * step
        f = nullcline_residual(x, p)
        if f_prev == 0.0:
            roots.append(x_prev)
        elif f_prev * f < 0.0:
            a, b, fa = x_prev, x, f_prev
            while b - a > tol:
                mid = 0.5 * (a + b)
                fm = nullcline_residual(mid, p)
                if fm == 0.0:
                    a = b = mid
                    break
                if fa * fm < 0.0:
                    b = mid
                else:
                    a, fa = mid, fm
            roots.append(0.5 * (a + b))
        x_prev, f_prev = x, f
    if f_prev == 0.0:
        roots.append(x_prev)
    deduped = []
    for x in roots:
        if not deduped or x - deduped[-1] > 10.0 * tol:
            deduped.append(x)
    return deduped


def _initial_step(p, t0, y0, f0, t_end, rtol, atol):
    # Hairer-style starting step selection
    sc = [atol + rtol * abs(y0[i]) for i in range(3)]
    d0 = math.sqrt(sum((y0[i] / sc[i]) ** 2 for i in range(3)) / 3.0)
    d1 = math.sqrt(sum((f0[i] / sc[i]) ** 2 for i in range(3)) / 3.0)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, t_end - t0)
    y1 = tuple(y0[i] + h0 * f0[i] for i in range(3))
    f1 = _rhs(y1, p)
    d2 = math.sqrt(sum(((f1[i] - f0[i]) / sc[i]) ** 2 for i in range(3)) / 3.0) / h0
    dm = max(d1, d2)
    h1 = (0.01 / dm) ** 0.2 if dm > 1e-15 else max(1e-6, h0 * 1e-3)
    return min(100.0 * h0, h1, t_end - t0)


def integrate(
    p,
    y0,
    t0: float,
    t_end: float,
    rtol: float,
    atol: float,
    eps_ext: float,
    conv_window: float,
    conv_tol: float,
    max_steps: int,
):
    """Adaptive RK45 run from (t0, y0) to t_end with extinction clamping.

    Components already below eps_ext at t0 are clamped to zero silently;
    components driven below eps_ext during the run are clamped to exactly
    zero at the end of the offending step and the crossing time is
    localized on the dense interpolant to within 1e-6 time units.

    Returns (t_array, y_array, events, reason, fail_time) where events is a
    list of (component_index, time) in time order.
    """
    y = [max(0.0, float(v)) for v in y0]
    extinct = [False, False, False]
    for i in range(3):
        if y[i] < eps_ext:
            y[i] = 0.0
            extinct[i] = True

    ts = [t0]
    ys = [tuple(y)]
    events: list[tuple[int, float]] = []

    t = t0
    if t_end <= t0:
        return np.array(ts), np.array(ys), events, REASON_T_END, t

    f = list(_rhs(y, p))
    h = _initial_step(p, t, y, f, t_end, rtol, atol)

    anchor_t = t0
    anchor_y = tuple(y)
    run_dev = 0.0

    reason = REASON_T_END
    fail_time = t_end
    steps = 0
    while t < t_end:
        if steps >= max_steps:
            reason = REASON_STEP_LIMIT
            fail_time = t
            break
        if h < 1e-14:
            reason = REASON_UNDERFLOW
            fail_time = t
            break
        if t + h > t_end:
            h = t_end - t
        steps += 1

        k1 = f
        ya = [y[i] + h * _A21 * k1[i] for i in range(3)]
        k2 = _rhs(ya, p)
        ya = [y[i] + h * (_A31 * k1[i] + _A32 * k2[i]) for i in range(3)]
        k3 = _rhs(ya, p)
        ya = [y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in range(3)]
        k4 = _rhs(ya, p)
        ya = [y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i]) for i in range(3)]
        k5 = _rhs(ya, p)
        ya = [
            y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
            for i in range(3)
        ]
        k6 = _rhs(ya, p)
        ynew = [
            y[i] + h * (_A71 * k1[i] + _A73 * k3[i] + _A74 * k4[i] + _A75 * k5[i] + _A76 * k6[i])
            for i in range(3)
        ]
        k7 = _rhs(ynew, p)

        err = 0.0
        for i in range(3):
            est = h * (
                _E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i]
            )
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            err += (est / sc) ** 2
        err = math.sqrt(err / 3.0)

        if err > 1.0:
            h *= min(1.0, max(0.1, 0.9 * err**-0.2))
            continue

        t_new = t + h
        # extinction events: clamp and localize on the dense interpolant
        hit = []
        for i in range(3):
            if not extinct[i] and ynew[i] < eps_ext:
                hit.append(i)
        if hit:
            for i in hit:
                dy = ynew[i] - y[i]
                r1, r2 = y[i], dy
                r3 = h * k1[i] - dy
                r4 = dy - h * k7[i] - r3
                r5 = h * (
                    _D1 * k1[i] + _D3 * k3[i] + _D4 * k4[i] + _D5 * k5[i] + _D6 * k6[i] + _D7 * k7[i]
                )

                def interp(th):
                    return r1 + th * (r2 + (1.0 - th) * (r3 + th * (r4 + (1.0 - th) * r5)))

                lo, hi_ = 0.0, 1.0
                w_lo = interp(lo) - eps_ext
                while (hi_ - lo) * h > 1e-6:
                    mid = 0.5 * (lo + hi_)
                    w_mid = interp(mid) - eps_ext
                    if w_lo * w_mid <= 0.0:
                        hi_ = mid
                    else:
                        lo, w_lo = mid, w_mid
                events.append((i, t + 0.5 * (lo + hi_) * h))
                ynew[i] = 0.0
                extinct[i] = True
            events.sort(key=lambda e: e[1])

        t = t_new
        y = ynew
        ts.append(t)
        ys.append(tuple(y))
        f = list(k7 if not hit else _rhs(y, p))

        if extinct[0] and extinct[1] and extinct[2]:
            reason = REASON_ALL_EXTINCT
            break

        # convergence: stayed within conv_tol of the anchor for a full window
        dev = max(abs(y[i] - anchor_y[i]) for i in range(3))
        if dev > run_dev:
            run_dev = dev
        if t - anchor_t >= conv_window:
            if run_dev < conv_tol:
                reason = REASON_CONVERGED
                break
            anchor_t = t
            anchor_y = tuple(y)
            run_dev = 0.0

        h *= min(10.0, max(0.2, 0.9 * err**-0.2 if err > 1e-300 else 10.0))

    return np.array(ts), np.array(ys), events, reason, fail_time
