"""Reference implementations used only as test oracles.

These are written independently of the package kernels: plain Python loops,
closed forms and brute force. They are slow and meant for small inputs.
"""

import math

import numpy as np
from numba import njit


def harmonic_response(t, period, xi, amp, freq):
    """Displacement of x'' + 2 xi w x' + w^2 x = amp sin(freq t) from rest."""
    t = np.asarray(t, dtype=float)
    w = 2 * math.pi / period
    wd = w * math.sqrt(1 - xi ** 2)
    den = (w ** 2 - freq ** 2) ** 2 + (2 * xi * w * freq) ** 2
    A = amp * (w ** 2 - freq ** 2) / den
    B = -amp * 2 * xi * w * freq / den
    C = -B
    D = (-A * freq + xi * w * C) / wd
    transient = np.exp(-xi * w * t) * (C * np.cos(wd * t) + D * np.sin(wd * t))
    return A * np.sin(freq * t) + B * np.cos(freq * t) + transient


def fine_input(ag, dt, m):
    n = len(ag)
    h = dt / m
    fine_t = h * np.arange((n - 1) * m + 1)
    return np.interp(fine_t, dt * np.arange(n), ag), h


def substeps(period, dt):
    return max(1, math.ceil(dt * 20.0 / period - 1e-9))


def newmark_linear(ag, dt, m, period, xi):
    """Incremental average-acceleration Newmark on linearly interpolated input.

    Returns fine-grid (x, v, relative acceleration, absolute acceleration).
    """
    agf, h = fine_input(ag, dt, m)
    w = 2 * math.pi / period
    k, c = w * w, 2 * xi * w
    p = -agf
    n = p.size
    x, v, a = np.zeros(n), np.zeros(n), np.zeros(n)
    a[0] = p[0]
    khat = k + 2 * c / h + 4 / h ** 2
    for i in range(n - 1):
        dp = p[i + 1] - p[i] + (4 / h + 2 * c) * v[i] + 2 * a[i]
        dx = dp / khat
        dv = 2 * dx / h - 2 * v[i]
        da = 4 * dx / h ** 2 - 4 * v[i] / h - 2 * a[i]
        x[i + 1], v[i + 1], a[i + 1] = x[i] + dx, v[i] + dv, a[i] + da
    return x, v, a, a + agf


def running_spectra(ag, dt, periods, checkpoints, xi=0.05):
    """Brute-force running maxima of |x| and |x'' + ag| over all substeps."""
    sa = np.zeros((len(periods), len(checkpoints)))
    su = np.zeros_like(sa)
    for i, T in enumerate(periods):
        m = substeps(T, dt)
        x, _, _, acc = newmark_linear(ag, dt, m, T, xi)
        h = dt / m
        for j, t in enumerate(checkpoints):
            end = min(int(math.floor(t / h + 1e-7)), x.size - 1)
            su[i, j] = max(abs(val) for val in x[: end + 1])
            sa[i, j] = max(abs(val) for val in acc[: end + 1])
    return sa, su


@njit(cache=False)
def _story_law(f, q, k0, eta, hard, d_new, d_c):
    trial = f + k0 * (d_new - d_c)
    over = abs(trial - q) - eta
    if eta <= 0 or over <= 0:
        return trial, q, k0
    dp = over / (k0 + hard)
    sign = 1.0 if trial - q > 0 else -1.0
    return trial - k0 * dp * sign, q + hard * dp * sign, k0 * hard / (k0 + hard)


@njit(cache=False)
def shear_building_newmark(ag, h, mass, k0, eta, hard, C):
    """Average-acceleration Newmark for a bilinear shear building.

    ``ag`` is already sampled at step ``h``. Each story follows a kinematic
    hardening bilinear law on drift; Newton iterations on the full system
    residual. Compiled only for speed; the logic shares nothing with the
    package kernels. Returns displacements (steps x stories).
    """
    n = mass.size
    M = np.diag(mass)
    steps = ag.size
    u = np.zeros((steps, n))
    x = np.zeros(n)
    v = np.zeros(n)
    a = -ag[0] * np.ones(n)
    f = np.zeros(n)
    q = np.zeros(n)
    d_c = np.zeros(n)
    d_new = np.zeros(n)
    f_new = np.zeros(n)
    q_new = np.zeros(n)
    kt = np.zeros(n)
    for i in range(steps - 1):
        x_new = x.copy()
        for _ in range(100):
            for s in range(n):
                d_new[s] = x_new[s] - (x_new[s - 1] if s > 0 else 0.0)
                f_new[s], q_new[s], kt[s] = _story_law(f[s], q[s], k0[s], eta[s], hard[s], d_new[s], d_c[s])
            fint = f_new.copy()
            fint[:-1] -= f_new[1:]
            a_new = 4 / h ** 2 * (x_new - x) - 4 / h * v - a
            v_new = v + h / 2 * (a + a_new)
            res = M @ a_new + C @ v_new + fint + mass * ag[i + 1]
            K = np.diag(kt.copy())
            for s in range(1, n):
                K[s - 1, s - 1] += kt[s]
                K[s - 1, s] = -kt[s]
                K[s, s - 1] = -kt[s]
            dx = np.linalg.solve(4 / h ** 2 * M + 2 / h * C + K, res)
            x_new = x_new - dx
            if np.max(np.abs(dx)) <= 1e-14 * (np.max(np.abs(x_new)) + 1e-9):
                break
        for s in range(n):
            d_new[s] = x_new[s] - (x_new[s - 1] if s > 0 else 0.0)
            f[s], q[s], _ = _story_law(f[s], q[s], k0[s], eta[s], hard[s], d_new[s], d_c[s])
            d_c[s] = d_new[s]
        a_new = 4 / h ** 2 * (x_new - x) - 4 / h * v - a
        v = v + h / 2 * (a + a_new)
        a = a_new
        x = x_new
        u[i + 1] = x
    return u
