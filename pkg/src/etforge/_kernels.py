"""Compiled Newmark (gamma=1/2, beta=1/4) kernels, all quantities per unit mass.

Hysteresis codes: 0 linear, 1 bilinear with kinematic hardening (EPP is the
zero-hardening case). Records are linearly interpolated onto ``m`` substeps
per sample.
"""

import os

import numpy as np
from numba import config, njit, prange

# Prefer OpenMP: some distributions ship a TBB too old for numba and warn.
if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
    config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

LINEAR = 0
BILINEAR = 1
_MAX_NEWTON = 60


@njit(cache=True, nogil=True)
def restoring(kind, k, hard, eta, x_new, x_c, f_c, q_c):
    """Return mapping from the committed state; returns (f, q, dp, k_tangent)."""
    f_tr = f_c + k * (x_new - x_c)
    if kind == LINEAR:
        return f_tr, q_c, 0.0, k
    xi = f_tr - q_c
    phi = abs(xi) - eta
    if phi <= 0.0:
        return f_tr, q_c, 0.0, k
    s = 1.0 if xi > 0.0 else -1.0
    dp = phi / (k + hard)
    return f_tr - s * k * dp, q_c + s * hard * dp, s * dp, k * hard / (k + hard)


@njit(cache=True, nogil=True)
def sdof_step(kind, k, hard, eta, c, h, x, v, a, f, q, ag1):
    """One Newmark step; returns (x, v, a_rel, f, q, dissipated_energy)."""
    b1 = 4.0 / (h * h)
    b2 = 4.0 / h
    if kind == LINEAR:
        dx = (b2 * v + a + c * v - f - ag1) / (b1 + 2.0 * c / h + k)
        x1 = x + dx
        f1 = k * x1
        q1 = q
        dp = 0.0
    else:
        x1 = x
        tol = 1e-13 * (abs(x) + eta / k)
        for _ in range(_MAX_NEWTON):
            f1, q1, dp, kt = restoring(kind, k, hard, eta, x1, x, f, q)
            acc = b1 * (x1 - x) - b2 * v - a
            vel = 2.0 / h * (x1 - x) - v
            res = acc + c * vel + f1 + ag1
            dx = -res / (b1 + 2.0 * c / h + kt)
            x1 += dx
            if abs(dx) <= tol:
                break
        f1, q1, dp, kt = restoring(kind, k, hard, eta, x1, x, f, q)
    a1 = b1 * (x1 - x) - b2 * v - a
    v1 = 2.0 / h * (x1 - x) - v
    return x1, v1, a1, f1, q1, eta * abs(dp)


@njit(cache=True, nogil=True)
def sdof_history(ag, dt, m, kind, k, hard, eta, c, x_cap):
    """Histories at record samples. Stops once |x| > x_cap; returns valid length."""
    n = ag.size
    h = dt / m
    xs = np.zeros(n)
    vs = np.zeros(n)
    ar = np.zeros(n)
    fs = np.zeros(n)
    es = np.zeros(n)
    x = 0.0
    v = 0.0
    f = 0.0
    q = 0.0
    e = 0.0
    a = -ag[0]
    ar[0] = a
    for i in range(n - 1):
        for s in range(1, m + 1):
            g1 = ag[i] + (ag[i + 1] - ag[i]) * s / m
            x, v, a, f, q, de = sdof_step(kind, k, hard, eta, c, h, x, v, a, f, q, g1)
            e += de
        xs[i + 1] = x
        vs[i + 1] = v
        ar[i + 1] = a
        fs[i + 1] = f
        es[i + 1] = e
        if abs(x) > x_cap:
            return xs, vs, ar, fs, es, i + 2
    return xs, vs, ar, fs, es, n


@njit(cache=True, nogil=True)
def _linear_run(ag, dt, m, k, c, x, v, a, xs, absacc, start, i_mod, delta):
    """Integrate from state (x, v, a) at fine index ``start`` to the end.

    Writes x and x'' + ag histories after ``start``. Record sample
    ``i_mod`` is shifted by ``delta`` (``i_mod=-1`` for none).
    """
    h = dt / m
    n = ag.size
    f = k * x
    i0 = start // m
    for i in range(i0, n - 1):
        g0 = ag[i] + (delta if i == i_mod else 0.0)
        g1 = ag[i + 1] + (delta if i + 1 == i_mod else 0.0)
        s_begin = start - i * m + 1 if i == i0 else 1
        for s in range(s_begin, m + 1):
            g = g0 + (g1 - g0) * s / m
            x, v, a, f, q, de = sdof_step(LINEAR, k, 0.0, 0.0, c, h, x, v, a, f, 0.0, g)
            j = i * m + s
            xs[j] = x
            absacc[j] = a + g


@njit(cache=True, nogil=True)
def _linear_states(ag, dt, m, k, c):
    """Full fine-grid (x, v, a_rel, a_abs) of the unperturbed run."""
    length = (ag.size - 1) * m + 1
    h = dt / m
    xs = np.zeros(length)
    vs = np.zeros(length)
    accs = np.zeros(length)
    absacc = np.zeros(length)
    x = 0.0
    v = 0.0
    a = -ag[0]
    f = 0.0
    accs[0] = a
    for i in range(ag.size - 1):
        for s in range(1, m + 1):
            g = ag[i] + (ag[i + 1] - ag[i]) * s / m
            x, v, a, f, q, de = sdof_step(LINEAR, k, 0.0, 0.0, c, h, x, v, a, f, 0.0, g)
            j = i * m + s
            xs[j] = x
            vs[j] = v
            accs[j] = a
            absacc[j] = a + g
    return xs, vs, accs, absacc


@njit(cache=True, nogil=True)
def linear_spectrum(ag, dt, m, k, c, ck_end):
    """Running maxima of |x| and |x'' + ag| at fine-index checkpoints ``ck_end``."""
    xs, vs, accs, absacc = _linear_states(ag, dt, m, k, c)
    nk = ck_end.size
    su = np.zeros(nk)
    sa = np.zeros(nk)
    mx = 0.0
    ma = 0.0
    j = 0
    for kk in range(nk):
        while j <= ck_end[kk]:
            if abs(xs[j]) > mx:
                mx = abs(xs[j])
            if abs(absacc[j]) > ma:
                ma = abs(absacc[j])
            j += 1
        su[kk] = mx
        sa[kk] = ma
    return sa, su


@njit(cache=True, parallel=True)
def linear_spectra(ag, dt, ms, ks, cs, ck_end):
    """Spectra for all periods: returns (Sa, Su), each (periods, checkpoints)."""
    npd = ms.size
    nk = ck_end.shape[1]
    sa = np.zeros((npd, nk))
    su = np.zeros((npd, nk))
    for p in prange(npd):
        a_row, u_row = linear_spectrum(ag, dt, ms[p], ks[p], cs[p], ck_end[p])
        sa[p] = a_row
        su[p] = u_row
    return sa, su


@njit(cache=True, nogil=True)
def _fd_one_period(ag, dt, m, k, c, ck_end, cols, step, dsa, dsu):
    xs, vs, accs, absacc = _linear_states(ag, dt, m, k, c)
    length = xs.size
    # prefix maxima of the unperturbed run
    pmx = np.zeros(length)
    pma = np.zeros(length)
    mx = 0.0
    ma = 0.0
    for j in range(length):
        mx = max(mx, abs(xs[j]))
        ma = max(ma, abs(absacc[j]))
        pmx[j] = mx
        pma[j] = ma
    nk = ck_end.size
    base_a = np.empty(nk)
    base_u = np.empty(nk)
    for kk in range(nk):
        base_a[kk] = pma[ck_end[kk]]
        base_u[kk] = pmx[ck_end[kk]]
    px = xs.copy()
    pab = absacc.copy()
    for col in range(cols.size):
        i = cols[col]
        start = (i - 1) * m if i > 0 else 0
        if start > ck_end[nk - 1]:
            continue
        a_start = -(ag[0] + step) if i == 0 else accs[start]
        _linear_run(ag, dt, m, k, c, xs[start], vs[start], a_start, px, pab, start, i, step)
        if i == 0:
            mx = 0.0
            ma = 0.0
        else:
            mx = pmx[start]
            ma = pma[start]
        j = start + 1
        for kk in range(nk):
            e = ck_end[kk]
            if e < start:
                continue
            while j <= e:
                if abs(px[j]) > mx:
                    mx = abs(px[j])
                if abs(pab[j]) > ma:
                    ma = abs(pab[j])
                j += 1
            dsa[kk, col] = (ma - base_a[kk]) / step
            dsu[kk, col] = (mx - base_u[kk]) / step


@njit(cache=True, parallel=True)
def fd_spectra_jacobian(ag, dt, ms, ks, cs, ck_end, cols, step):
    """Forward-difference derivatives of (Sa, Su) w.r.t. record samples ``cols``.

    Each perturbed run restarts from the stored state just before the
    perturbed sample, so untouched prefixes are never re-simulated.
    Returns arrays shaped (periods, checkpoints, len(cols)).
    """
    npd = ms.size
    nk = ck_end.shape[1]
    dsa = np.zeros((npd, nk, cols.size))
    dsu = np.zeros((npd, nk, cols.size))
    for p in prange(npd):
        _fd_one_period(ag, dt, ms[p], ks[p], cs[p], ck_end[p], cols, step, dsa[p], dsu[p])
    return dsa, dsu


@njit(cache=True, nogil=True)
def mdof_history(ag, dt, m, mass, k0, hard, eta, kinds, cmat, heights, drift_cap):
    """Shear-building Newmark run with Newton iterations.

    Story springs act on inter-story drift. Returns floor displacements and
    story forces at record samples plus the valid length (truncated once any
    drift ratio exceeds ``drift_cap``).
    """
    n = ag.size
    ns = mass.size
    h = dt / m
    b1 = 4.0 / (h * h)
    u = np.zeros(ns)
    v = np.zeros(ns)
    a = np.zeros(ns)
    for s_ in range(ns):
        a[s_] = -ag[0]
    fst = np.zeros(ns)
    qst = np.zeros(ns)
    dcom = np.zeros(ns)
    us = np.zeros((n, ns))
    fs = np.zeros((n, ns))
    es = np.zeros(n)
    energy = 0.0
    all_linear = True
    for s_ in range(ns):
        if kinds[s_] != LINEAR:
            all_linear = False
    kt = np.zeros(ns)
    f_new = np.zeros(ns)
    q_new = np.zeros(ns)
    dp_new = np.zeros(ns)
    for i in range(n - 1):
        for sub in range(1, m + 1):
            g1 = ag[i] + (ag[i + 1] - ag[i]) * sub / m
            u1 = u.copy()
            for it in range(_MAX_NEWTON):
                for s_ in range(ns):
                    d_new = u1[s_] - (u1[s_ - 1] if s_ > 0 else 0.0)
                    f_new[s_], q_new[s_], dp_new[s_], kt[s_] = restoring(
                        kinds[s_], k0[s_], hard[s_], eta[s_], d_new, dcom[s_], fst[s_], qst[s_]
                    )
                acc = b1 * (u1 - u) - 4.0 / h * v - a
                vel = 2.0 / h * (u1 - u) - v
                res = mass * acc + cmat @ vel + mass * g1
                for s_ in range(ns):
                    res[s_] += f_new[s_]
                    if s_ + 1 < ns:
                        res[s_] -= f_new[s_ + 1]
                kmat = b1 * np.diag(mass) + 2.0 / h * cmat
                for s_ in range(ns):
                    kmat[s_, s_] += kt[s_]
                    if s_ > 0:
                        kmat[s_ - 1, s_ - 1] += kt[s_]
                        kmat[s_ - 1, s_] -= kt[s_]
                        kmat[s_, s_ - 1] -= kt[s_]
                du = np.linalg.solve(kmat, -res)
                u1 += du
                if all_linear:
                    break
                if np.max(np.abs(du)) <= 1e-13 * (np.max(np.abs(u1)) + 1e-6):
                    break
            for s_ in range(ns):
                d_new = u1[s_] - (u1[s_ - 1] if s_ > 0 else 0.0)
                f_new[s_], q_new[s_], dp_new[s_], kt[s_] = restoring(
                    kinds[s_], k0[s_], hard[s_], eta[s_], d_new, dcom[s_], fst[s_], qst[s_]
                )
                energy += eta[s_] * abs(dp_new[s_]) / mass.sum()
                dcom[s_] = d_new
                fst[s_] = f_new[s_]
                qst[s_] = q_new[s_]
            a1 = b1 * (u1 - u) - 4.0 / h * v - a
            v = 2.0 / h * (u1 - u) - v
            a = a1
            u = u1
        us[i + 1] = u
        fs[i + 1] = fst
        es[i + 1] = energy
        for s_ in range(ns):
            if abs(dcom[s_]) / heights[s_] > drift_cap:
                return us, fs, es, i + 2
    return us, fs, es, n
