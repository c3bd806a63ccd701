"""Small fixed-size numerical kernel: 3x3 eigenvalues, cubic characteristic
coefficients, Routh-Hurwitz verdicts and bracketed scalar root finding.

The eigenvalue solver is the closed-form (trigonometric/Cardano) cubic
solution rather than an iterative method: the matrices here are always 3x3
and determinism matters because the results feed sign-based bifurcation
test functions.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "CubicCoefficients",
    "char_coeffs",
    "eig3",
    "routh_hurwitz",
    "bracketed_roots",
    "STABLE",
    "UNSTABLE",
    "MARGINAL",
]

STABLE = "stable"
UNSTABLE = "unstable"
MARGINAL = "marginal"

#: margin tolerance for the Routh-Hurwitz verdict
RH_TOL = 1e-9


class CubicCoefficients(NamedTuple):
    """Coefficients of lambda^3 + omega1*lambda^2 + omega2*lambda + omega3."""

    omega1: float
    omega2: float
    omega3: float


def char_coeffs(J) -> CubicCoefficients:
    """Characteristic-polynomial coefficients of a 3x3 matrix.

    omega1 = -trace(J), omega2 = sum of principal 2x2 minors,
    omega3 = -det(J).
    """
    J = np.asarray(J, dtype=float)
    omega1 = -(J[0, 0] + J[1, 1] + J[2, 2])
    omega2 = (
        (J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
        + (J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0])
        + (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
    )
    det = (
        J[0, 0] * (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
        - J[0, 1] * (J[1, 0] * J[2, 2] - J[1, 2] * J[2, 0])
        + J[0, 2] * (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0])
    )
    return CubicCoefficients(omega1, omega2, -det)


def _cubic_roots(a: float, b: float, c: float) -> tuple[complex, complex, complex]:
    # roots of lambda^3 + a*lambda^2 + b*lambda + c via the depressed cubic
    p = b - a * a / 3.0
    q = 2.0 * a**3 / 27.0 - a * b / 3.0 + c
    shift = -a / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    scale = max(1.0, abs(p), abs(q))
    if abs(p) < 1e-30 * scale and abs(q) < 1e-30 * scale:
        t = (0.0, 0.0, 0.0)
        return (t[0] + shift, t[1] + shift, t[2] + shift)
    if disc > 0.0:
        # one real root plus a complex pair; avoid cancellation in the cube root
        sq = math.sqrt(disc)
        u3 = -q / 2.0 - math.copysign(sq, q)
        u = math.copysign(abs(u3) ** (1.0 / 3.0), u3)
        v = -p / (3.0 * u) if u != 0.0 else 0.0
        t_real = u + v
        re = -t_real / 2.0
        im = math.sqrt(3.0) / 2.0 * abs(u - v)
        return (t_real + shift, complex(re + shift, im), complex(re + shift, -im))
    # three real roots (trigonometric form; p <= 0 here)
    m = 2.0 * math.sqrt(max(0.0, -p / 3.0))
    if m == 0.0:
        return (shift, shift, shift)
    arg = 3.0 * q / (p * m)
    arg = min(1.0, max(-1.0, arg))
    theta = math.acos(arg) / 3.0
    roots = tuple(m * math.cos(theta - 2.0 * math.pi * k / 3.0) + shift for k in range(3))
    return roots  # type: ignore[return-value]


def eig3(J) -> tuple[complex, complex, complex]:
    """Eigenvalues of a 3x3 matrix, sorted by descending real part then
    descending imaginary part."""
    c = char_coeffs(J)
    roots = [complex(z) for z in _cubic_roots(c.omega1, c.omega2, c.omega3)]
    roots.sort(key=lambda z: (-z.real, -z.imag))
    return (roots[0], roots[1], roots[2])


def routh_hurwitz(c: CubicCoefficients, tol: float = RH_TOL):
    """Stability verdict for a cubic characteristic polynomial.

    Stable iff omega1 > tol, omega3 > tol and omega1*omega2 - omega3 > tol;
    marginal when any of the three margins lies within +-tol.  Returns
    (verdict, margins) where margins = (omega1, omega3, omega1*omega2 - omega3)
    double as bifurcation test functions.
    """
    margins = (c.omega1, c.omega3, c.omega1 * c.omega2 - c.omega3)
    if any(abs(m) <= tol for m in margins):
        return MARGINAL, margins
    if all(m > tol for m in margins):
        return STABLE, margins
    return UNSTABLE, margins


def bracketed_roots(
    f: Callable[[float], float],
    a: float,
    b: float,
    n: int = 100,
    tol: float = 1e-12,
) -> list[float]:
    """All sign-change roots of f on [a, b] from an n-point uniform grid.

    Each sign change is refined by bisection to an interval shorter than
    `tol`; roots closer than 10*tol are deduplicated.  Tangential
    (even-multiplicity) roots produce no sign change and are not seen.
    Returns roots in ascending order; empty list when no sign change exists.
    """
    if not (a < b):
        raise ValueError(f"invalid interval [{a}, {b}]")
    if n < 2:
        raise ValueError("grid count n must be >= 2")
    xs = np.linspace(a, b, n)
    fs = [f(float(x)) for x in xs]
    roots: list[float] = []
    for i in range(n - 1):
        fa, fb = fs[i], fs[i + 1]
        if fa == 0.0:
            roots.append(float(xs[i]))
            continue
        if fa * fb < 0.0:
            lo, hi = float(xs[i]), float(xs[i + 1])
            flo = fa
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                fm = f(mid)
                if fm == 0.0:
                    lo = hi = mid
                    break
                if flo * fm < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi))
    if fs[-1] == 0.0:
        roots.append(float(xs[-1]))
    roots.sort()
    deduped: list[float] = []
    for x in roots:
        if not deduped or x - deduped[-1] > 10.0 * tol:
            deduped.append(x)
    return deduped
