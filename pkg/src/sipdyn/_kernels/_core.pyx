# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: Dormand-Prince 5(4) integration with extinction
clamping, and the interior-nullcline root scan.

Mirrors `_pure.py` coefficient-for-coefficient; only the execution speed
differs.
"""

from libc.math cimport fabs, pow, sqrt

import numpy as np

BACKEND = "compiled"

REASON_T_END = 0
REASON_ALL_EXTINCT = 1
REASON_CONVERGED = 2
REASON_UNDERFLOW = 3
REASON_STEP_LIMIT = 4

cdef double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0, C5 = 8.0 / 9.0
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double A71 = 35.0 / 384.0, A73 = 500.0 / 1113.0, A74 = 125.0 / 192.0
cdef double A75 = -2187.0 / 6784.0, A76 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0
cdef double D1 = -12715105075.0 / 11282082432.0
cdef double D3 = 87487479700.0 / 32700410799.0
cdef double D4 = -10690763975.0 / 1880347072.0
cdef double D5 = 701980252875.0 / 199316789632.0
cdef double D6 = -1453857185.0 / 822651844.0
cdef double D7 = 69997945.0 / 29380423.0


cdef struct Pars:
    double a0, a1, a2, d0, d1, d2, d3, e0, K, L, r


cdef inline double powr(double s, double r) nogil:
    return pow(s, r) if s > 0.0 else 0.0


cdef inline void c_rhs(double S, double I, double P, Pars* p, double* out) nogil:
    cdef double sr = powr(S, p.r)
    out[0] = p.a0 * S * (1.0 - (S + I) / p.K) * (S - p.L) - p.d0 * sr * P - p.e0 * S * I
    out[1] = -p.a1 * I + p.e0 * S * I - p.d1 * I * P
    out[2] = -p.a2 * P + p.d2 * sr * P + p.d3 * I * P


cdef inline double c_residual(double S, Pars* p) nogil:
    cdef double sr = powr(S, p.r)
    cdef double i_star = (p.a2 - p.d2 * sr) / p.d3
    cdef double p_star = (p.e0 * S - p.a1) / p.d1
    return (
        p.a0 * (1.0 - (S + i_star) / p.K) * (S - p.L)
        - p.d0 * (sr / S) * p_star
        - p.e0 * i_star
    )


cdef Pars make_pars(object ptuple):
    cdef Pars p
    p.a0 = ptuple[0]; p.a1 = ptuple[1]; p.a2 = ptuple[2]
    p.d0 = ptuple[3]; p.d1 = ptuple[4]; p.d2 = ptuple[5]; p.d3 = ptuple[6]
    p.e0 = ptuple[7]; p.K = ptuple[8]; p.L = ptuple[9]; p.r = ptuple[10]
    return p


def nullcline_residual(double S, object ptuple):
    cdef Pars p = make_pars(ptuple)
    return c_residual(S, &p)


def nullcline_root_scan(object ptuple, double lo, double hi, int n, double tol):
    cdef Pars p = make_pars(ptuple)
    cdef double step, x, f, x_prev, f_prev, a, b, fa, mid, fm, last
    cdef int i
    if not (lo < hi) or n < 2:
        return []
    roots = []
    step = (hi - lo) / (n - 1)
    x_prev = lo
    f_prev = c_residual(lo, &p)
    for i in range(1, n):
        x = lo + i * step
        f = c_residual(x, &p)
        if f_prev == 0.0:
            roots.append(x_prev)
        elif f_prev * f < 0.0:
            a = x_prev; b = x; fa = f_prev
            while b - a > tol:
                mid = 0.5 * (a + b)
                fm = c_residual(mid, &p)
                if fm == 0.0:
                    a = mid; b = mid
                    break
                if fa * fm < 0.0:
                    b = mid
                else:
                    a = mid; fa = fm
            roots.append(0.5 * (a + b))
        x_prev = x
        f_prev = f
    if f_prev == 0.0:
        roots.append(x_prev)
    deduped = []
    last = 0.0
    for x in roots:
        if (not deduped) or x - last > 10.0 * tol:
            deduped.append(x)
            last = x
    return deduped


cdef inline double dense_eval(double r1, double r2, double r3, double r4,
                              double r5, double th) nogil:
    return r1 + th * (r2 + (1.0 - th) * (r3 + th * (r4 + (1.0 - th) * r5)))


def integrate(object ptuple, object y0, double t0, double t_end,
              double rtol, double atol, double eps_ext,
              double conv_window, double conv_tol, long max_steps):
    """Same contract as the pure backend's `integrate`."""
    cdef Pars p = make_pars(ptuple)
    cdef double[3] y, f, k1, k2, k3, k4, k5, k6, k7, ynew, ya, anchor_y
    cdef bint[3] extinct
    cdef int i
    cdef double t = t0, h, err, est, sc, t_new, dev, run_dev, anchor_t
    cdef double d0n, d1n, d2n, h0, h1, dm
    cdef double dy, r1, r2, r3, r4, r5, lo, hi_, w_lo, w_mid, mid
    cdef long steps = 0
    cdef int reason = REASON_T_END
    cdef double fail_time = t_end
    cdef bint had_hit

    for i in range(3):
        y[i] = y0[i]
        if y[i] < 0.0:
            y[i] = 0.0
        extinct[i] = y[i] < eps_ext
        if extinct[i]:
            y[i] = 0.0

    cdef long cap = 1024
    cdef long nsamp = 0
    t_buf = np.empty(cap, dtype=np.float64)
    y_buf = np.empty((cap, 3), dtype=np.float64)
    cdef double[::1] tv = t_buf
    cdef double[:, ::1] yv = y_buf
    events = []

    tv[0] = t0
    for i in range(3):
        yv[0, i] = y[i]
    nsamp = 1

    if t_end <= t0:
        return t_buf[:nsamp].copy(), y_buf[:nsamp].copy(), events, REASON_T_END, t

    c_rhs(y[0], y[1], y[2], &p, f)

    # starting step (Hairer heuristic)
    d0n = 0.0; d1n = 0.0
    for i in range(3):
        sc = atol + rtol * fabs(y[i])
        d0n += (y[i] / sc) ** 2
        d1n += (f[i] / sc) ** 2
    d0n = sqrt(d0n / 3.0); d1n = sqrt(d1n / 3.0)
    h0 = 1e-6 if (d0n < 1e-5 or d1n < 1e-5) else 0.01 * d0n / d1n
    if h0 > t_end - t0:
        h0 = t_end - t0
    for i in range(3):
        ya[i] = y[i] + h0 * f[i]
    c_rhs(ya[0], ya[1], ya[2], &p, k2)
    d2n = 0.0
    for i in range(3):
        sc = atol + rtol * fabs(y[i])
        d2n += ((k2[i] - f[i]) / sc) ** 2
    d2n = sqrt(d2n / 3.0) / h0
    dm = d1n if d1n > d2n else d2n
    h1 = pow(0.01 / dm, 0.2) if dm > 1e-15 else (1e-6 if 1e-6 > h0 * 1e-3 else h0 * 1e-3)
    h = 100.0 * h0
    if h1 < h:
        h = h1
    if t_end - t0 < h:
        h = t_end - t0

    anchor_t = t0
    for i in range(3):
        anchor_y[i] = y[i]
    run_dev = 0.0

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

        for i in range(3):
            k1[i] = f[i]
            ya[i] = y[i] + h * A21 * k1[i]
        c_rhs(ya[0], ya[1], ya[2], &p, k2)
        for i in range(3):
            ya[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
        c_rhs(ya[0], ya[1], ya[2], &p, k3)
        for i in range(3):
            ya[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        c_rhs(ya[0], ya[1], ya[2], &p, k4)
        for i in range(3):
            ya[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        c_rhs(ya[0], ya[1], ya[2], &p, k5)
        for i in range(3):
            ya[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                + A64 * k4[i] + A65 * k5[i])
        c_rhs(ya[0], ya[1], ya[2], &p, k6)
        for i in range(3):
            ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i]
                                  + A75 * k5[i] + A76 * k6[i])
        c_rhs(ynew[0], ynew[1], ynew[2], &p, k7)

        err = 0.0
        for i in range(3):
            est = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i]
                       + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            sc = atol + rtol * (fabs(y[i]) if fabs(y[i]) > fabs(ynew[i]) else fabs(ynew[i]))
            err += (est / sc) ** 2
        err = sqrt(err / 3.0)

        if err > 1.0:
            sc = 0.9 * pow(err, -0.2)
            if sc < 0.1:
                sc = 0.1
            if sc > 1.0:
                sc = 1.0
            h *= sc
            continue

        t_new = t + h
        had_hit = False
        for i in range(3):
            if (not extinct[i]) and ynew[i] < eps_ext:
                had_hit = True
                dy = ynew[i] - y[i]
                r1 = y[i]; r2 = dy
                r3 = h * k1[i] - dy
                r4 = dy - h * k7[i] - r3
                r5 = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i]
                          + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                lo = 0.0; hi_ = 1.0
                w_lo = dense_eval(r1, r2, r3, r4, r5, lo) - eps_ext
                while (hi_ - lo) * h > 1e-6:
                    mid = 0.5 * (lo + hi_)
                    w_mid = dense_eval(r1, r2, r3, r4, r5, mid) - eps_ext
                    if w_lo * w_mid <= 0.0:
                        hi_ = mid
                    else:
                        lo = mid
                        w_lo = w_mid
                events.append((i, t + 0.5 * (lo + hi_) * h))
                ynew[i] = 0.0
                extinct[i] = True
        if had_hit:
            events.sort(key=lambda e: e[1])

        t = t_new
        for i in range(3):
            y[i] = ynew[i]

        if nsamp >= cap:
            cap *= 2
            t_buf = np.concatenate([t_buf, np.empty(cap - nsamp, dtype=np.float64)])
            y_buf = np.concatenate([y_buf, np.empty((cap - nsamp, 3), dtype=np.float64)])
            tv = t_buf
            yv = y_buf
        tv[nsamp] = t
        for i in range(3):
            yv[nsamp, i] = y[i]
        nsamp += 1

        if had_hit:
            c_rhs(y[0], y[1], y[2], &p, f)
        else:
            for i in range(3):
                f[i] = k7[i]

        if extinct[0] and extinct[1] and extinct[2]:
            reason = REASON_ALL_EXTINCT
            break

        dev = 0.0
        for i in range(3):
            sc = fabs(y[i] - anchor_y[i])
            if sc > dev:
                dev = sc
        if dev > run_dev:
            run_dev = dev
        if t - anchor_t >= conv_window:
            if run_dev < conv_tol:
                reason = REASON_CONVERGED
                break
            anchor_t = t
            for i in range(3):
                anchor_y[i] = y[i]
            run_dev = 0.0

        sc = 0.9 * pow(err, -0.2) if err > 1e-300 else 10.0
        if sc < 0.2:
            sc = 0.2
        if sc > 10.0:
            sc = 10.0
        h *= sc

    return t_buf[:nsamp].copy(), y_buf[:nsamp].copy(), events, reason, fail_time
