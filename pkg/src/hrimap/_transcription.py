"""Compiled objective and exact gradient for the transcribed interface problem.

With a piecewise-constant control the RK4 step of the unicycle is explicit:
heading advances by ``phi = h*w`` and the position increment is
``h*v/6 * (e(th) + 4 e(th + phi/2) + e(th + phi))`` with ``e`` the unit
heading vector. The chord length of a step therefore does not depend on the
heading, and the terminal position depends on earlier turn rates only through
the headings of later steps, which is a suffix sum in the reverse pass.
"""

import math

import numba
import numpy as np


@numba.njit(cache=True)
def cost_and_gradient(
    z, n_knots, knot_of_step, h, knot_dt, start, goal,
    a_lo, a_hi, u_lo, u_hi, weights, M, positions_only, want_grad,
):
    """Objective value (and gradient if ``want_grad``) at decision vector ``z``."""
    n = h.shape[0]
    G0 = z[0]
    G1 = z[1]
    G2 = z[2]
    G3 = z[3]

    a = np.empty((n_knots, 2))
    vk = np.empty(n_knots)
    wk = np.empty(n_knots)
    v_free = np.empty(n_knots)
    w_free = np.empty(n_knots)
    for k in range(n_knots):
        for j in range(2):
            a[k, j] = min(max(z[4 + 2 * k + j], a_lo[j]), a_hi[j])
        vr = G0 * a[k, 0] + G1 * a[k, 1]
        wr = G2 * a[k, 0] + G3 * a[k, 1]
        vk[k] = min(max(vr, u_lo[0]), u_hi[0])
        wk[k] = min(max(wr, u_lo[1]), u_hi[1])
        v_free[k] = 1.0 if u_lo[0] <= vr <= u_hi[0] else 0.0
        w_free[k] = 1.0 if u_lo[1] <= wr <= u_hi[1] else 0.0

    dx = np.empty(n)
    dy = np.empty(n)
    Cs = np.empty(n)
    Ss = np.empty(n)
    Cw = np.empty(n)
    Sw = np.empty(n)
    arc_dv = np.zeros(n)
    arc_dw = np.zeros(n)

    x = start[0]
    y = start[1]
    th = start[2]
    arc = 0.0
    for i in range(n):
        v = vk[knot_of_step[i]]
        w = wk[knot_of_step[i]]
        hi = h[i]
        phi = hi * w
        c1 = math.cos(th)
        s1 = math.sin(th)
        c2 = math.cos(th + 0.5 * phi)
        s2 = math.sin(th + 0.5 * phi)
        c4 = math.cos(th + phi)
        s4 = math.sin(th + phi)
        Cs[i] = c1 + 4.0 * c2 + c4
        Ss[i] = s1 + 4.0 * s2 + s4
        Cw[i] = -2.0 * s2 - s4
        Sw[i] = 2.0 * c2 + c4
        dx[i] = hi * v * Cs[i] / 6.0
        dy[i] = hi * v * Ss[i] / 6.0
        x += dx[i]
        y += dy[i]
        th += phi

        pc = 1.0 + 4.0 * math.cos(0.5 * phi) + math.cos(phi)
        ps = 4.0 * math.sin(0.5 * phi) + math.sin(phi)
        P = pc * pc + ps * ps
        q = hi * v / 6.0
        L2 = q * q * P
        if not positions_only:
            L2 += phi * phi
        L = math.sqrt(L2)
        arc += L
        if want_grad and L > 0.0:
            dP = 2.0 * pc * (-2.0 * math.sin(0.5 * phi) - math.sin(phi)) + 2.0 * ps * (
                2.0 * math.cos(0.5 * phi) + math.cos(phi)
            )
            arc_dv[i] = (hi / 6.0) * q * P / L
            extra = 0.0 if positions_only else 2.0 * phi * hi
            arc_dw[i] = (q * q * dP * hi + extra) / (2.0 * L)

    ex = x - goal[0]
    ey = y - goal[1]
    et = th - goal[2]
    et = et - 2.0 * math.pi * math.ceil((et - math.pi) / (2.0 * math.pi))
    terminal = ex * ex + ey * ey + et * et

    effort = 0.0
    for k in range(n_knots):
        effort += knot_dt[k] * (
            M[0, 0] * a[k, 0] * a[k, 0]
            + (M[0, 1] + M[1, 0]) * a[k, 0] * a[k, 1]
            + M[1, 1] * a[k, 1] * a[k, 1]
        )

    p = math.hypot(G0 + G3, G2 - G1)
    r = math.hypot(G0 - G3, G1 + G2)
    dist = math.hypot(0.5 * (p + r) - 1.0, 0.5 * abs(p - r) - 1.0)

    total = weights[0] * terminal + weights[1] * effort + weights[2] * arc + weights[3] * dist
    g = np.zeros(4 + 2 * n_knots)
    if not want_grad:
        return total, g

    gx = 2.0 * ex
    gy = 2.0 * ey
    gt = 2.0 * et
    gv = np.zeros(n_knots)
    gw = np.zeros(n_knots)
    suffix = 0.0
    for i in range(n - 1, -1, -1):
        k = knot_of_step[i]
        v = vk[k]
        hi = h[i]
        dv = weights[0] * hi * (gx * Cs[i] + gy * Ss[i]) / 6.0 + weights[2] * arc_dv[i]
        dw = weights[0] * (
            hi * hi * v * (gx * Cw[i] + gy * Sw[i]) / 6.0 + gt * hi + hi * suffix
        ) + weights[2] * arc_dw[i]
        gv[k] += dv
        gw[k] += dw
        suffix += gy * dx[i] - gx * dy[i]

    for k in range(n_knots):
        dvk = gv[k] * v_free[k]
        dwk = gw[k] * w_free[k]
        g[0] += dvk * a[k, 0]
        g[1] += dvk * a[k, 1]
        g[2] += dwk * a[k, 0]
        g[3] += dwk * a[k, 1]
        for j in range(2):
            zj = z[4 + 2 * k + j]
            if a_lo[j] <= zj <= a_hi[j]:
                d_eff = weights[1] * knot_dt[k] * (
                    (M[j, 0] + M[0, j]) * a[k, 0] + (M[j, 1] + M[1, j]) * a[k, 1]
                )
                if j == 0:
                    g[4 + 2 * k] = G0 * dvk + G2 * dwk + d_eff
                else:
                    g[5 + 2 * k] = G1 * dvk + G3 * dwk + d_eff

    if dist > 0.0:
        U, sv, Vt = np.linalg.svd(np.array([[G0, G1], [G2, G3]]))
        for j in range(2):
            c = weights[3] * (sv[j] - 1.0) / dist
            g[0] += c * U[0, j] * Vt[j, 0]
            g[1] += c * U[0, j] * Vt[j, 1]
            g[2] += c * U[1, j] * Vt[j, 0]
            g[3] += c * U[1, j] * Vt[j, 1]
    return total, g
