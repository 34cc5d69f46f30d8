"""Dormand-Prince 5(4) stepper for the joint (phi, E) Riccati system.

The kernel is plain numpy restricted to what numba's nopython mode
accepts; :mod:`._accel` provides the compiled and interpreted variants.
State layout: ``y = [vec(P), vec(E)]`` row-major, ``E`` present only
when ``with_E`` is set.
"""

import numpy as np

from ._accel import jit

DP_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0, 0.0],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0],
])
# 5th-order weights minus embedded 4th-order weights
DP_E = np.array([
    71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
])

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0
# PI controller exponents (Hairer, Norsett & Wanner, DOPRI5)
BETA = 0.04
ALPHA = 0.2 - 0.75 * BETA

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAXSTEPS = 2


def _dopri_riccati(A, R, S, P0, E0, t0, grid, rtol, atol, max_step, max_steps, with_E,
                   a_tab, e_tab):
    r = A.shape[0]
    m = r * r
    n = 2 * m if with_E else m
    n_out = grid.shape[0]
    P_out = np.empty((n_out, r, r))
    E_out = np.empty((n_out, r, r))

    y = np.empty(n)
    y[:m] = P0.ravel()
    if with_E:
        y[m:] = E0.ravel()
    K = np.zeros((7, n))
    ytmp = np.empty(n)
    t = t0
    h = 0.0
    err_old = 1e-4
    n_steps = 0
    n_rejected = 0
    status = STATUS_OK
    fail_t = 0.0
    eps = 2.220446049250313e-16

    idx = 0
    while idx < n_out and grid[idx] <= t0:
        P_out[idx] = P0
        if with_E:
            E_out[idx] = E0
        idx += 1

    need_f0 = True
    rejected_last = False
    while idx < n_out:
        t_target = grid[idx]
        for s in range(0 if need_f0 else 1, 7):
            if s == 0:
                ytmp[:] = y
            else:
                ytmp[:] = y + h * np.dot(a_tab[s, :s], K[:s])
            P = np.ascontiguousarray(ytmp[:m]).reshape((r, r))
            PS = np.dot(P, S)
            dP = np.dot(A, P) + np.dot(P, A.T) + R - np.dot(PS, P)
            K[s, :m] = dP.ravel()
            if with_E:
                E = np.ascontiguousarray(ytmp[m:]).reshape((r, r))
                K[s, m:] = np.dot(A - PS, E).ravel()
            if need_f0:
                break
        if need_f0:
            need_f0 = False
            # starting step from the scaled sizes of y and f(y)
            d0 = 0.0
            d1 = 0.0
            for i in range(n):
                sc = atol + rtol * abs(y[i])
                d0 += (y[i] / sc) ** 2
                d1 += (K[0, i] / sc) ** 2
            d0 = np.sqrt(d0 / n)
            d1 = np.sqrt(d1 / n)
            if d0 < 1e-5 or d1 < 1e-5:
                h = 1e-6
            else:
                h = 0.01 * d0 / d1
            h = min(h, max_step, t_target - t)
            continue

        # K[6] holds f(y + h*sum b_i K_i): FSAL for the next step
        y_new = ytmp.copy()
        err = 0.0
        for i in range(n):
            acc = 0.0
            for s in range(7):
                acc += e_tab[s] * K[s, i]
            sc = atol + rtol * max(abs(y[i]), abs(y_new[i]))
            err += (h * acc / sc) ** 2
        err = np.sqrt(err / n)

        if err <= 1.0:
            t = t + h
            P = np.ascontiguousarray(y_new[:m]).reshape((r, r))
            y_new[:m] = (0.5 * (P + P.T)).ravel()
            y[:] = y_new
            K[0] = K[6]
            n_steps += 1
            if t >= t_target - 16.0 * eps * max(abs(t_target), 1.0):
                t = t_target
                P_out[idx] = np.ascontiguousarray(y[:m]).reshape((r, r))
                if with_E:
                    E_out[idx] = np.ascontiguousarray(y[m:]).reshape((r, r))
                idx += 1
            if err == 0.0:
                fac = FAC_MAX
            else:
                fac = SAFETY * err ** (-ALPHA) * err_old ** BETA
                fac = min(FAC_MAX, max(FAC_MIN, fac))
            if rejected_last:
                fac = min(fac, 1.0)
            err_old = max(err, 1e-4)
            h_next = h * fac
            rejected_last = False
        else:
            fac = max(FAC_MIN, SAFETY * err ** (-ALPHA))
            h_next = h * fac
            n_rejected += 1
            rejected_last = True
        if idx < n_out:
            h_next = min(h_next, max_step, grid[idx] - t)
            if h_next <= 16.0 * eps * max(abs(t), 1.0) and grid[idx] - t > 16.0 * eps * max(abs(t), 1.0):
                status = STATUS_UNDERFLOW
                fail_t = t
                break
        if n_steps + n_rejected >= max_steps:
            status = STATUS_MAXSTEPS
            fail_t = t
            break
        h = h_next
    return P_out, E_out, status, fail_t, n_steps, n_rejected


dopri_riccati = jit(_dopri_riccati)
