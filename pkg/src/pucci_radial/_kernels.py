"""Hot loops: radial right-hand side, Dormand-Prince 5(4) stepping with event
restarts, quintic Hermite dense output and adaptive Simpson quadrature.

Everything here is plain numba-compatible Python over floats and 1-D float
arrays; see ``_jit`` for how the numba/CPython path is chosen.
"""
import math

import numpy as np

from ._jit import njit

STATUS_STOP = 0
STATUS_TRUNCATED = 1
STATUS_UNDERFLOW = 2
STATUS_MAX_STEPS = 3
STATUS_GRAZING = 4

EV_UZERO = 0
EV_DUZERO = 1
EV_DDUZERO = 2
EV_UNDETERMINED = 3

# Dormand-Prince 5(4)
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)


@njit(cache=True)
def ddu(r, u, du, p, wpos, wneg, nm1):
    if u > 0.0:
        f = u**p
    elif u < 0.0:
        f = -((-u) ** p)
    else:
        f = 0.0
    q = du / r
    if q >= 0.0:
        xi = -f - nm1 * wpos * q
    else:
        xi = -f - nm1 * wneg * q
    if xi >= 0.0:
        return xi / wpos
    return xi / wneg


@njit(cache=True)
def pucci_value(d2, q, wpos, wneg, nm1):
    a = wpos * d2 if d2 >= 0.0 else wneg * d2
    b = wpos * q if q >= 0.0 else wneg * q
    return a + nm1 * b


@njit(cache=True)
def _sgn(x):
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


@njit(cache=True)
def dp5_step(r, u, d, h, k1u, k1d, p, wpos, wneg, nm1):
    """One Dormand-Prince step for (u, u'). Returns the 5th-order state, the
    embedded error estimate and the derivative at the new point (FSAL)."""
    u2 = u + h * (A21 * k1u)
    d2 = d + h * (A21 * k1d)
    k2u = d2
    k2d = ddu(r + C2 * h, u2, d2, p, wpos, wneg, nm1)
    u3 = u + h * (A31 * k1u + A32 * k2u)
    d3 = d + h * (A31 * k1d + A32 * k2d)
    k3u = d3
    k3d = ddu(r + C3 * h, u3, d3, p, wpos, wneg, nm1)
    u4 = u + h * (A41 * k1u + A42 * k2u + A43 * k3u)
    d4 = d + h * (A41 * k1d + A42 * k2d + A43 * k3d)
    k4u = d4
    k4d = ddu(r + C4 * h, u4, d4, p, wpos, wneg, nm1)
    u5 = u + h * (A51 * k1u + A52 * k2u + A53 * k3u + A54 * k4u)
    d5 = d + h * (A51 * k1d + A52 * k2d + A53 * k3d + A54 * k4d)
    k5u = d5
    k5d = ddu(r + C5 * h, u5, d5, p, wpos, wneg, nm1)
    u6 = u + h * (A61 * k1u + A62 * k2u + A63 * k3u + A64 * k4u + A65 * k5u)
    d6 = d + h * (A61 * k1d + A62 * k2d + A63 * k3d + A64 * k4d + A65 * k5d)
    k6u = d6
    k6d = ddu(r + h, u6, d6, p, wpos, wneg, nm1)
    un = u + h * (B1 * k1u + B3 * k3u + B4 * k4u + B5 * k5u + B6 * k6u)
    dn = d + h * (B1 * k1d + B3 * k3d + B4 * k4d + B5 * k5d + B6 * k6d)
    k7u = dn
    k7d = ddu(r + h, un, dn, p, wpos, wneg, nm1)
    eu = h * (E1 * k1u + E3 * k3u + E4 * k4u + E5 * k5u + E6 * k6u + E7 * k7u)
    ed = h * (E1 * k1d + E3 * k3d + E4 * k4d + E5 * k5d + E6 * k6d + E7 * k7d)
    return un, dn, eu, ed, k7u, k7d


@njit(cache=True)
def _event_value(j, u, d, a):
    if j == 0:
        return u
    if j == 1:
        return d
    return a


@njit(cache=True)
def _root_in_step(j, r, u, d, a, k1u, k1d, h, g_end, s_before, p, wpos, wneg, nm1):
    # Illinois regula falsi on the sub-step length; returns the end of the
    # final bracket on the far side of the sign change.
    lo = 0.0
    g_lo = _event_value(j, u, d, a)
    if _sgn(g_lo) != s_before:
        g_lo = s_before * 1e-300
    hi = h
    g_hi = g_end
    side = 0
    for _ in range(200):
        if hi - lo <= 4e-16 * (r + hi):
            break
        s = hi - g_hi * (hi - lo) / (g_hi - g_lo)
        if not (lo < s < hi):
            s = 0.5 * (lo + hi)
        un, dn, eu, ed, k7u, k7d = dp5_step(r, u, d, s, k1u, k1d, p, wpos, wneg, nm1)
        gs = _event_value(j, un, dn, k7d)
        if gs == 0.0 or _sgn(gs) != s_before:
            hi = s
            g_hi = gs if gs != 0.0 else -s_before * 1e-300
            if side == 1:
                g_lo *= 0.5
            side = 1
        else:
            lo = s
            g_lo = gs
            if side == -1:
                g_hi *= 0.5
            side = -1
    return hi


@njit(cache=True)
def _grow_f(x, n):
    y = np.empty(2 * x.shape[0])
    y[:n] = x[:n]
    return y


@njit(cache=True)
def _grow_i(x, n):
    y = np.empty(2 * x.shape[0], dtype=np.int64)
    y[:n] = x[:n]
    return y


@njit(cache=True)
def integrate(r0, u0, d0, p, wpos, wneg, nm1, r_max, tol, n_zero_stop, h0, max_steps):
    """Adaptive integration of the radial equation from (r0, u0, d0).

    Sign changes of u, u' and u'' end the current step exactly at the root,
    so every accepted step lies inside one smooth branch of the right-hand
    side. Stops at the ``n_zero_stop``-th zero of u (if > 0) or at r_max.

    The error norm measures both components in units of u, relative to the
    local magnitude max(|u|, r|u'|), so decaying tails keep relative accuracy.
    The returned error array is the running sum of accepted local error
    estimates in units of u.
    """
    cap = 512
    R = np.empty(cap)
    U = np.empty(cap)
    D = np.empty(cap)
    A = np.empty(cap)
    ERR = np.empty(cap)
    ecap = 16
    EK = np.empty(ecap, dtype=np.int64)
    ER = np.empty(ecap)
    ES = np.empty(ecap)

    r = r0
    u = u0
    d = d0
    a = ddu(r, u, d, p, wpos, wneg, nm1)
    R[0] = r
    U[0] = u
    D[0] = d
    A[0] = a
    ERR[0] = 0.0
    n = 1
    ne = 0

    s0 = _sgn(u) if u != 0.0 else _sgn(d)
    s1 = _sgn(d) if d != 0.0 else _sgn(a)
    s2 = _sgn(a) if a != 0.0 else -s0
    signs = np.array([s0, s1, s2])

    h = h0
    err_acc = 0.0
    nz = 0
    status = STATUS_MAX_STEPS
    k1u = d
    k1d = a
    steps = 0
    while steps < max_steps:
        steps += 1
        if r >= r_max:
            status = STATUS_TRUNCATED
            break
        if r + h >= r_max:
            h = r_max - r
        un, dn, eu, ed, k7u, k7d = dp5_step(r, u, d, h, k1u, k1d, p, wpos, wneg, nm1)
        rn = r + h
        m = max(max(abs(u), abs(un)), max(r * abs(d), rn * abs(dn))) + 1e-300
        errn = max(abs(eu), rn * abs(ed)) / (tol * m)
        if not (errn <= 1.0):
            if errn != errn or errn > 1e10:
                fac = 0.1
            else:
                fac = max(0.1, 0.9 * errn ** (-0.2))
            h *= fac
            if h <= 1e-14 * r:
                status = STATUS_UNDERFLOW
                break
            continue
        an = k7d

        best_j = -1
        best_s = h
        for j in range(3):
            g = _event_value(j, un, dn, an)
            if g != 0.0 and _sgn(g) != signs[j]:
                s = _root_in_step(j, r, u, d, a, k1u, k1d, h, g, signs[j], p, wpos, wneg, nm1)
                if best_j < 0 or s < best_s:
                    best_s = s
                    best_j = j

        h_used = h
        if best_j >= 0:
            if best_s <= 8e-16 * r:
                # root sits on the current grid point: record it there
                if ne == EK.shape[0]:
                    EK = _grow_i(EK, ne)
                    ER = _grow_f(ER, ne)
                    ES = _grow_f(ES, ne)
                EK[ne] = best_j
                ER[ne] = r
                ES[ne] = signs[best_j]
                ne += 1
                signs[best_j] = -signs[best_j]
                if best_j == 0:
                    nz += 1
                    if n_zero_stop > 0 and nz >= n_zero_stop:
                        status = STATUS_STOP
                        break
                continue
            if best_s < h:
                un, dn, eu, ed, k7u, k7d = dp5_step(r, u, d, best_s, k1u, k1d, p, wpos, wneg, nm1)
                rn = r + best_s
                an = k7d
                m = max(max(abs(u), abs(un)), max(r * abs(d), rn * abs(dn))) + 1e-300
                errn = max(abs(eu), rn * abs(ed)) / (tol * m)
                h_used = best_s

        if n == R.shape[0]:
            R = _grow_f(R, n)
            U = _grow_f(U, n)
            D = _grow_f(D, n)
            A = _grow_f(A, n)
            ERR = _grow_f(ERR, n)
        err_acc += errn * tol * m
        R[n] = rn
        U[n] = un
        D[n] = dn
        A[n] = an
        ERR[n] = err_acc
        n += 1
        r = rn
        u = un
        d = dn
        a = an
        k1u = k7u
        k1d = k7d

        stop = False
        if best_j >= 0:
            if ne == EK.shape[0]:
                EK = _grow_i(EK, ne)
                ER = _grow_f(ER, ne)
                ES = _grow_f(ES, ne)
            EK[ne] = best_j
            ER[ne] = rn
            ES[ne] = signs[best_j]
            ne += 1
            signs[best_j] = -signs[best_j]
            if best_j == 0:
                nz += 1
                # compare the crossing slope with |u| over the last e-fold in r
                loc = 0.0
                j = n - 1
                while j >= 0 and R[j] >= rn / math.e:
                    if abs(U[j]) > loc:
                        loc = abs(U[j])
                    j -= 1
                if j >= 0 and abs(U[j]) > loc:
                    loc = abs(U[j])
                if rn * abs(dn) < tol * loc:
                    status = STATUS_GRAZING
                    stop = True
                elif n_zero_stop > 0 and nz >= n_zero_stop:
                    status = STATUS_STOP
                    stop = True
        if stop:
            break

        if errn > 0.0:
            fac = min(5.0, max(0.2, 0.9 * errn ** (-0.2)))
        else:
            fac = 5.0
        h = h_used * fac
        if best_j >= 0 and h < h_used:
            h = h_used

    return (
        R[:n].copy(),
        U[:n].copy(),
        D[:n].copy(),
        A[:n].copy(),
        ERR[:n].copy(),
        EK[:ne].copy(),
        ER[:ne].copy(),
        ES[:ne].copy(),
        status,
        steps,
    )


@njit(cache=True)
def hermite_eval(r0, r1, u0, u1, d0, d1, a0, a1, x):
    """Quintic Hermite interpolant through (u, u', u'') at both ends."""
    h = r1 - r0
    t = (x - r0) / h
    dy = u1 - u0
    D0 = h * d0
    D1 = h * d1
    Q0 = h * h * a0
    Q1 = h * h * a1
    c2 = 0.5 * Q0
    c3 = 10.0 * dy - 6.0 * D0 - 4.0 * D1 - 0.5 * (3.0 * Q0 - Q1)
    c4 = -15.0 * dy + 8.0 * D0 + 7.0 * D1 + 0.5 * (3.0 * Q0 - 2.0 * Q1)
    c5 = 6.0 * dy - 3.0 * (D0 + D1) - 0.5 * (Q0 - Q1)
    uu = u0 + t * (D0 + t * (c2 + t * (c3 + t * (c4 + t * c5))))
    du = (D0 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + 5.0 * c5 * t)))) / h
    return uu, du


@njit(cache=True)
def hermite_many(R, U, D, A, x):
    out_u = np.empty(x.shape[0])
    out_d = np.empty(x.shape[0])
    n = R.shape[0]
    for k in range(x.shape[0]):
        xv = x[k]
        i = np.searchsorted(R, xv, side="right") - 1
        if i < 0:
            i = 0
        if i > n - 2:
            i = n - 2
        uu, dd = hermite_eval(R[i], R[i + 1], U[i], U[i + 1], D[i], D[i + 1], A[i], A[i + 1], xv)
        out_u[k] = uu
        out_d[k] = dd
    return out_u, out_d


@njit(cache=True)
def _weighted_density(x, r0, r1, u0, u1, d0, d1, a0, a1, p, gamma, varrho, nm1):
    uu, _ = hermite_eval(r0, r1, u0, u1, d0, d1, a0, a1, x)
    if x <= varrho:
        w = varrho**gamma
    else:
        w = x**gamma
    return abs(uu) ** (p + 1.0) * w * x**nm1


@njit(cache=True)
def weighted_quadrature(R, U, D, A, p, gamma, varrho, nm1, tol_abs):
    """Adaptive Simpson of |u|^(p+1) g(r) r^(N-1) over the grid span.

    g is varrho^gamma up to varrho and r^gamma beyond. Each grid interval is
    integrated separately on the Hermite interpolant; the absolute tolerance
    is shared in proportion to interval length. Returns (value, error).
    """
    n = R.shape[0]
    L = R[n - 1] - R[0]
    total = 0.0
    err = 0.0
    sa = np.empty(128)
    sb = np.empty(128)
    sfa = np.empty(128)
    sfm = np.empty(128)
    sfb = np.empty(128)
    sw = np.empty(128)
    stol = np.empty(128)
    sdep = np.empty(128, dtype=np.int64)
    for i in range(n - 1):
        r0 = R[i]
        r1 = R[i + 1]
        if r1 <= r0:
            continue
        fa = _weighted_density(r0, r0, r1, U[i], U[i + 1], D[i], D[i + 1], A[i], A[i + 1], p, gamma, varrho, nm1)
        fb = _weighted_density(r1, r0, r1, U[i], U[i + 1], D[i], D[i + 1], A[i], A[i + 1], p, gamma, varrho, nm1)
        mid = 0.5 * (r0 + r1)
        fm = _weighted_density(mid, r0, r1, U[i], U[i + 1], D[i], D[i + 1], A[i], A[i + 1], p, gamma, varrho, nm1)
        top = 0
        sa[0] = r0
        sb[0] = r1
        sfa[0] = fa
        sfm[0] = fm
        sfb[0] = fb
        sw[0] = (r1 - r0) / 6.0 * (fa + 4.0 * fm + fb)
        stol[0] = tol_abs * (r1 - r0) / L
        sdep[0] = 0
        top = 1
        while top > 0:
            top -= 1
            a = sa[top]
            b = sb[top]
            fa = sfa[top]
            fm = sfm[top]
            fb = sfb[top]
            whole = sw[top]
            tl = stol[top]
            dep = sdep[top]
            m = 0.5 * (a + b)
            lm = 0.5 * (a + m)
            rm = 0.5 * (m + b)
            flm = _weighted_density(lm, r0, r1, U[i], U[i + 1], D[i], D[i + 1], A[i], A[i + 1], p, gamma, varrho, nm1)
            frm = _weighted_density(rm, r0, r1, U[i], U[i + 1], D[i], D[i + 1], A[i], A[i + 1], p, gamma, varrho, nm1)
            left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
            right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
            delta = left + right - whole
            if abs(delta) <= 15.0 * tl or dep >= 40 or top >= 124:
                total += left + right + delta / 15.0
                err += abs(delta) / 15.0
            else:
                sa[top] = a
                sb[top] = m
                sfa[top] = fa
                sfm[top] = flm
                sfb[top] = fm
                sw[top] = left
                stol[top] = 0.5 * tl
                sdep[top] = dep + 1
                top += 1
                sa[top] = m
                sb[top] = b
                sfa[top] = fm
                sfm[top] = frm
                sfb[top] = fb
                sw[top] = right
                stol[top] = 0.5 * tl
                sdep[top] = dep + 1
                top += 1
    return total, err


@njit(cache=True)
def h_functional_increase(R, U, D, A, p, wpos, wneg):
    """Largest relative increase of H = u'^2/2 + |u|^(p+1)/(c(p+1)) over one
    step, with c the weight multiplying u'' in that step's branch."""
    worst = 0.0
    for i in range(R.shape[0] - 1):
        s = A[i] + A[i + 1]
        c = wpos if s >= 0.0 else wneg
        h0 = 0.5 * D[i] ** 2 + abs(U[i]) ** (p + 1.0) / (c * (p + 1.0))
        h1 = 0.5 * D[i + 1] ** 2 + abs(U[i + 1]) ** (p + 1.0) / (c * (p + 1.0))
        scale = max(h0, h1) + 1e-300
        inc = (h1 - h0) / scale
        if inc > worst:
            worst = inc
    return worst


def compile_all():
    """Trigger compilation with representative argument types."""
    res = integrate(1e-3, 1.0, -1e-3, 2.0, 1.0, 1.0, 2.0, 10.0, 1e-8, 1, 1e-4, 1000)
    R, U, D, A = res[0], res[1], res[2], res[3]
    hermite_many(R, U, D, A, np.linspace(R[0], R[-1], 5))
    weighted_quadrature(R, U, D, A, 2.0, 0.0, 1.0, 2.0, 1e-8)
    h_functional_increase(R, U, D, A, 2.0, 1.0, 1.0)
    pucci_value(1.0, 1.0, 1.0, 1.0, 2.0)
    return math.isfinite(R[-1])
