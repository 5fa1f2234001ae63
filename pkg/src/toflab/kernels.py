"""Numeric inner loops: batch drift evaluation and the damped least-squares solver.

These run compiled under numba when available (see :mod:`toflab._jit`). They
take and return plain numpy arrays and scalars only.
"""

from __future__ import annotations

import math

import numpy as np

from ._jit import njit

# estimator families for drift_errors; quantities packed in q[0..3]
SIMPLE = 0  # q = (t1, t2)                clocks (A, B)
TWR = 1  # q = (R_A, D_B)                 clocks (A, B)
SDS = 2  # q = (R_A, D_A, R_B, D_B)       clocks (A, A, B, B)
ASYM = 3  # same packing as SDS
ONE_WAY_MIRROR = 4  # q = (R_A or R_T, D_B) clocks (A or T, B)
DOUBLE_PULSE = 5  # same packing as SDS


@njit
def drift_errors(family, q, d_ab, truth, eps):
    """Estimator error (seconds) for each drift row ``eps[i] = (eps_0, eps_1)``.

    Float arithmetic on continuously scaled intervals; no quantisation.
    """
    n = eps.shape[0]
    out = np.empty(n)
    for i in range(n):
        m0 = 1.0 + eps[i, 0]
        m1 = 1.0 + eps[i, 1]
        if family == SIMPLE:
            est = q[1] * m1 - q[0] * m0
        elif family == TWR:
            est = 0.5 * (q[0] * m0 - q[1] * m1)
        elif family == ONE_WAY_MIRROR:
            est = q[0] * m0 - q[1] * m1 - d_ab
        else:
            ra = q[0] * m0
            da = q[1] * m0
            rb = q[2] * m1
            db = q[3] * m1
            if family == SDS:
                est = 0.25 * (ra - db + rb - da)
            elif family == ASYM:
                est = (ra * rb - da * db) / (ra + rb + da + db)
            else:
                est = 2.0 * (ra * rb - da * db) / (ra + rb + da + db) - d_ab
        out[i] = est - truth
    return out


@njit
def _residuals(x, y, b, a, meas, tdoa_mode, r, jac):
    cost = 0.0
    for i in range(meas.shape[0]):
        dxb = x - b[i, 0]
        dyb = y - b[i, 1]
        nb = math.sqrt(dxb * dxb + dyb * dyb)
        ri = nb - meas[i]
        if nb > 1e-300:
            jac[i, 0] = dxb / nb
            jac[i, 1] = dyb / nb
        else:
            jac[i, 0] = 0.0
            jac[i, 1] = 0.0
        if tdoa_mode:
            dxa = x - a[i, 0]
            dya = y - a[i, 1]
            na = math.sqrt(dxa * dxa + dya * dya)
            ri -= na
            if na > 1e-300:
                jac[i, 0] -= dxa / na
                jac[i, 1] -= dya / na
        r[i] = ri
        cost += ri * ri
    return cost


@njit
def lm_solve(b, a, meas, tdoa_mode, x0, grad_tol, max_iter, damping0):
    """Levenberg-damped Gauss-Newton on ``r_i = |x-b_i| - [|x-a_i|] - meas_i``.

    Returns ``(x, y, iterations, converged, rms_start, rms_end)``. Residuals
    are in meters. Damping is multiplied by 10 after a rejected step and
    divided by 10 after an accepted one. Stops when the gradient norm falls
    below ``grad_tol`` or the accepted step is negligible against ``|x|``.
    """
    n = meas.shape[0]
    r = np.empty(n)
    jac = np.empty((n, 2))
    r_new = np.empty(n)
    jac_new = np.empty((n, 2))
    x = x0[0]
    y = x0[1]
    cost = _residuals(x, y, b, a, meas, tdoa_mode, r, jac)
    rms_start = math.sqrt(cost / n)
    lam = damping0
    converged = False
    it = 0
    while it < max_iter:
        g0 = 0.0
        g1 = 0.0
        h00 = 0.0
        h01 = 0.0
        h11 = 0.0
        for i in range(n):
            g0 += jac[i, 0] * r[i]
            g1 += jac[i, 1] * r[i]
            h00 += jac[i, 0] * jac[i, 0]
            h01 += jac[i, 0] * jac[i, 1]
            h11 += jac[i, 1] * jac[i, 1]
        if math.sqrt(g0 * g0 + g1 * g1) < grad_tol:
            converged = True
            break
        it += 1
        accepted = False
        while lam < 1e16:
            m00 = h00 + lam
            m11 = h11 + lam
            det = m00 * m11 - h01 * h01
            if det > 0.0:
                sx = -(m11 * g0 - h01 * g1) / det
                sy = -(m00 * g1 - h01 * g0) / det
                cost_new = _residuals(x + sx, y + sy, b, a, meas, tdoa_mode, r_new, jac_new)
                if cost_new < cost:
                    accepted = True
                    break
            lam *= 10.0
        if not accepted:
            break
        x += sx
        y += sy
        cost = cost_new
        r[:] = r_new
        jac[:, :] = jac_new
        lam = max(lam / 10.0, 1e-12)
        if math.sqrt(sx * sx + sy * sy) <= 1e-15 * (1.0 + math.sqrt(x * x + y * y)):
            converged = True
            break
    return x, y, it, converged, rms_start, math.sqrt(cost / n)
