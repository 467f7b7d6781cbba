"""Reference values computed without the package under test.

Nothing here imports pucci_radial. The Lane-Emden oracle is a fixed-step
classical RK4 run on two step sizes with Richardson extrapolation of the
located zero; the bubble values are closed forms.
"""
from __future__ import annotations

import math

import numpy as np

# frozen outputs of lane_emden_first_zero(3, 3.0); test_oracles re-derives them
LANE_EMDEN_N3_P3_FIRST_ZERO = 6.896848619378
LANE_EMDEN_N3_P3_SLOPE = -0.0424297576044


def _rhs(r, y, N, p):
    u, v = y
    return np.array([v, -abs(u) ** (p - 1.0) * u - (N - 1.0) / r * v])


def _rk4_zero(N: int, p: float, h: float, r0: float = 1e-3) -> tuple[float, float]:
    """First zero of u'' + (N-1)/r u' + |u|^{p-1} u = 0, u(0) = 1, with fixed step h.

    Starts from the two-term series at r0. The zero inside the sign-change
    step is read off a cubic Hermite interpolant, which is O(h^4) like RK4.
    """
    b = -1.0 / (2.0 * N)
    d = p / (8.0 * N * (N + 2.0))
    r = r0
    y = np.array([1.0 + b * r0**2 + d * r0**4, 2 * b * r0 + 4 * d * r0**3])
    while True:
        k1 = _rhs(r, y, N, p)
        k2 = _rhs(r + h / 2, y + h / 2 * k1, N, p)
        k3 = _rhs(r + h / 2, y + h / 2 * k2, N, p)
        k4 = _rhs(r + h, y + h * k3, N, p)
        yn = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if yn[0] <= 0.0:
            break
        r, y = r + h, yn
        if r > 1e3:
            raise RuntimeError("no zero")
    # Hermite cubic on [r, r + h] in s in [0, 1]
    u0, u1, m0, m1 = y[0], yn[0], y[1] * h, yn[1] * h

    def H(s):
        return ((2 * s**3 - 3 * s**2 + 1) * u0 + (s**3 - 2 * s**2 + s) * m0
                + (-2 * s**3 + 3 * s**2) * u1 + (s**3 - s**2) * m1)

    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if H(mid) > 0:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    slope = ((6 * s**2 - 6 * s) * u0 + (3 * s**2 - 4 * s + 1) * m0 + (-6 * s**2 + 6 * s) * u1
             + (3 * s**2 - 2 * s) * m1) / h
    return r + s * h, slope


def lane_emden_first_zero(N: int = 3, p: float = 3.0, h: float = 2e-3) -> tuple[float, float]:
    """Richardson-extrapolated first zero and slope there (order-4 correction)."""
    z1, s1 = _rk4_zero(N, p, h)
    z2, s2 = _rk4_zero(N, p, h / 2)
    return z2 + (z2 - z1) / 15.0, s2 + (s2 - s1) / 15.0


def bubble_profile(N: int, r):
    r = np.asarray(r, float)
    return (1.0 + r * r / (N * (N - 2.0))) ** (-(N - 2.0) / 2.0)


def bubble_energy(N: int) -> float:
    """Energy of the critical bubble over R^N with the weight at p = (N+2)/(N-2).

    There the weight exponent vanishes, so the energy is the plain integral
    of u^{2N/(N-2)}; with s = r^2/(N(N-2)) it becomes a Beta function.
    """
    k = N * (N - 2.0)
    omega = 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)
    beta = math.gamma(N / 2.0) * math.gamma(N / 2.0) / math.gamma(N)
    return omega * 0.5 * k ** (N / 2.0) * beta


def bubble_inflection(N: int) -> float:
    """Radius where the bubble changes concavity, r^2 = N(N-2)/(N-1)."""
    return math.sqrt(N * (N - 2.0) / (N - 1.0))
