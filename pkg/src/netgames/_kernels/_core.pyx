# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementation of the hot kernels.

Must mirror netgames._kernels._fallback operation for operation; only
floating-point association may differ.
"""

import numpy as np

from libc.math cimport INFINITY, fabs, sqrt

from netgames.errors import NumericFailure

BACKEND = "compiled"

cdef double CONV_ABS = 1e-8
cdef double CONV_REL = 1e-5


cdef double _phi(const double[::1] a, const double[::1] beta, const double[:, ::1] msym) noexcept:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j
    cdef double quad = 0.0
    cdef double lin = 0.0
    cdef double own = 0.0
    cdef double row
    for i in range(n):
        own += a[i] * a[i]
        lin += beta[i] * a[i]
        row = 0.0
        for j in range(n):
            row += msym[i, j] * a[j]
        quad += a[i] * row
    return -0.5 * own + lin + 0.5 * quad


def run_br(const double[:, ::1] mgrad, const double[:, ::1] msym,
           const double[::1] beta, const double[::1] lo, const double[::1] hi,
           a0_in, double gate, int sel_mode, const double[::1] rand_u,
           Py_ssize_t max_iters, Py_ssize_t record_every,
           bint stop_on_converged):
    cdef Py_ssize_t n = beta.shape[0]
    a_arr = np.array(a0_in, dtype=np.float64)
    cdef double[::1] a = a_arr
    if record_every < 1:
        record_every = 1
    cdef Py_ssize_t max_rec = max_iters // record_every + 2
    rec_idx_arr = np.empty(max_rec, dtype=np.int64)
    rec_prof_arr = np.empty((max_rec, n), dtype=np.float64)
    cdef long long[::1] rec_idx = rec_idx_arr
    cdef double[:, ::1] rec_prof = rec_prof_arr
    cdef Py_ssize_t n_rec = 0
    phi_arr = np.empty(max_iters + 1, dtype=np.float64)
    cdef double[::1] phi_step = phi_arr
    phi_step[0] = _phi(a, beta, msym)
    xs = np.empty(n, dtype=np.float64)
    brs = np.empty(n, dtype=np.float64)
    imps = np.empty(n, dtype=np.float64)
    cdef double[::1] xv = xs
    cdef double[::1] brv = brs
    cdef double[::1] impv = imps
    cdef Py_ssize_t last = n - 1
    cdef long long first_conv = -1
    cdef long long last_violation = -1
    cdef double min_gain = INFINITY
    cdef double max_drop = 0.0
    cdef int term = 1
    cdef Py_ssize_t iters = max_iters
    cdef Py_ssize_t k, i, j, idx
    cdef double x, b, old, phi_new, gain
    cdef bint conv

    for k in range(max_iters):
        if k % record_every == 0:
            rec_idx[n_rec] = k
            for j in range(n):
                rec_prof[n_rec, j] = a[j]
            n_rec += 1
        for i in range(n):
            x = beta[i]
            for j in range(n):
                x += mgrad[i, j] * a[j]
            b = x
            if b < lo[i]:
                b = lo[i]
            elif b > hi[i]:
                b = hi[i]
            xv[i] = x
            brv[i] = b
            impv[i] = 0.5 * ((a[i] - x) * (a[i] - x) - (b - x) * (b - x))
        idx = -1
        conv = False
        for i in range(n):
            if impv[i] > gate:
                idx = i
                break
        if idx < 0:
            term = 0
            iters = k
            if first_conv < 0:
                first_conv = k
            break
        if sel_mode == 0:
            idx = -1
            for j in range(1, n + 1):
                i = (last + j) % n
                if impv[i] > gate:
                    idx = i
                    break
        else:
            if sel_mode == 1:
                idx = <Py_ssize_t>(rand_u[k] * n)
                if idx >= n:
                    idx = n - 1
            else:
                idx = k % n
            if impv[idx] <= gate:
                phi_step[k + 1] = phi_step[k]
                if first_conv < 0:
                    first_conv = k
                continue
        old = a[idx]
        a[idx] = brv[idx]
        last = idx
        phi_new = _phi(a, beta, msym)
        gain = phi_new - phi_step[k]
        if gain < min_gain:
            min_gain = gain
        if -gain > max_drop:
            max_drop = -gain
        phi_step[k + 1] = phi_new
        conv = fabs(a[idx] - old) <= CONV_ABS + CONV_REL * fabs(old)
        if conv:
            if first_conv < 0:
                first_conv = k
        else:
            last_violation = k
        if stop_on_converged and conv:
            term = 2
            iters = k + 1
            break
    if n_rec == 0 or rec_idx[n_rec - 1] != <long long>iters:
        rec_idx[n_rec] = iters
        for j in range(n):
            rec_prof[n_rec, j] = a[j]
        n_rec += 1
    return (a_arr, int(iters), term, rec_idx_arr[:n_rec].copy(),
            rec_prof_arr[:n_rec].copy(), phi_arr[:iters + 1].copy(),
            int(first_conv), min_gain, max_drop, int(last_violation))


def run_gp(const double[:, ::1] mgrad, const double[:, ::1] msym,
           const double[::1] beta, const double[::1] lo, const double[::1] hi,
           a0_in, double gate, const double[::1] etas, int stop_mode,
           double step_tol, Py_ssize_t max_iters, Py_ssize_t record_every):
    cdef Py_ssize_t n = beta.shape[0]
    a_arr = np.array(a0_in, dtype=np.float64)
    cdef double[::1] a = a_arr
    if record_every < 1:
        record_every = 1
    cdef Py_ssize_t max_rec = max_iters // record_every + 2
    rec_idx_arr = np.empty(max_rec, dtype=np.int64)
    rec_prof_arr = np.empty((max_rec, n), dtype=np.float64)
    cdef long long[::1] rec_idx = rec_idx_arr
    cdef double[:, ::1] rec_prof = rec_prof_arr
    cdef Py_ssize_t n_rec = 0
    phi_arr = np.empty(max_iters + 1, dtype=np.float64)
    cdef double[::1] phi_step = phi_arr
    phi_step[0] = _phi(a, beta, msym)
    nxt = np.empty(n, dtype=np.float64)
    cdef double[::1] a_new = nxt
    cdef long long first_conv = -1
    cdef long long last_violation = -1
    cdef double min_gain = INFINITY
    cdef double max_drop = 0.0
    cdef int term = 1
    cdef Py_ssize_t iters = max_iters
    cdef Py_ssize_t k, i, j
    cdef double gval, v, d, step, phi_new, gain
    cdef bint conv, moved, fire

    for k in range(max_iters):
        if k % record_every == 0:
            rec_idx[n_rec] = k
            for j in range(n):
                rec_prof[n_rec, j] = a[j]
            n_rec += 1
        moved = False
        conv = True
        step = 0.0
        for i in range(n):
            gval = -a[i] + beta[i]
            for j in range(n):
                gval += mgrad[i, j] * a[j]
            if gate >= 0.0:
                fire = fabs(gval) > gate
            else:
                fire = True
            if fire:
                v = a[i] + etas[i] * gval
                if v < lo[i]:
                    v = lo[i]
                elif v > hi[i]:
                    v = hi[i]
            else:
                v = a[i]
            a_new[i] = v
            d = fabs(v - a[i])
            if d > step:
                step = d
            if d > CONV_ABS + CONV_REL * fabs(a[i]):
                conv = False
            if v != a[i]:
                moved = True
        if conv:
            if first_conv < 0:
                first_conv = k
        else:
            last_violation = k
        if stop_mode == 0 and not moved:
            term = 0
            iters = k
            break
        for i in range(n):
            a[i] = a_new[i]
        phi_new = _phi(a, beta, msym)
        gain = phi_new - phi_step[k]
        if step > 0.0 and gain < min_gain:
            min_gain = gain
        if -gain > max_drop:
            max_drop = -gain
        phi_step[k + 1] = phi_new
        if stop_mode == 1 and conv:
            term = 2
            iters = k + 1
            break
        if stop_mode == 2 and step <= step_tol:
            term = 2
            iters = k + 1
            break
    if n_rec == 0 or rec_idx[n_rec - 1] != <long long>iters:
        rec_idx[n_rec] = iters
        for j in range(n):
            rec_prof[n_rec, j] = a[j]
        n_rec += 1
    return (a_arr, int(iters), term, rec_idx_arr[:n_rec].copy(),
            rec_prof_arr[:n_rec].copy(), phi_arr[:iters + 1].copy(),
            int(first_conv), min_gain, max_drop, int(last_violation))


def deviation_scan(const double[:, ::1] mgrad, const double[:, ::1] msym,
                   const double[::1] beta, i_idx_in,
                   const double[:, ::1] profiles,
                   const double[::1] new_actions):
    cdef const long long[::1] i_idx = np.ascontiguousarray(i_idx_in, dtype=np.int64)
    cdef Py_ssize_t m = i_idx.shape[0]
    cdef Py_ssize_t n = beta.shape[0]
    buf = np.empty(n, dtype=np.float64)
    cdef double[::1] dev = buf
    cdef Py_ssize_t k, i, j
    cdef double z, ai, ap, bi, u0, u1, phi0, phi1, worst, viol
    worst = 0.0
    for k in range(m):
        i = <Py_ssize_t>i_idx[k]
        z = 0.0
        for j in range(n):
            z += mgrad[i, j] * profiles[k, j]
        ai = profiles[k, i]
        ap = new_actions[k]
        bi = beta[i]
        u0 = -0.5 * ai * ai + bi * ai + z * ai
        u1 = -0.5 * ap * ap + bi * ap + z * ap
        phi0 = _phi(profiles[k], beta, msym)
        for j in range(n):
            dev[j] = profiles[k, j]
        dev[i] = ap
        phi1 = _phi(dev, beta, msym)
        viol = fabs((u0 - u1) - (phi0 - phi1))
        if viol > worst:
            worst = viol
    return worst


def jacobi_spectrum(mat, double rel_tol=1e-12, int max_sweeps=100):
    a_arr = np.array(mat, dtype=np.float64)
    cdef double[:, ::1] a = a_arr
    cdef Py_ssize_t n = a.shape[0]
    if n == 1:
        return np.diagonal(a_arr).copy()
    cdef double total = 0.0
    cdef Py_ssize_t i, j, p, q, sweep
    for i in range(n):
        for j in range(n):
            total += a[i, j] * a[i, j]
    total = sqrt(total)
    if total == 0.0:
        return np.zeros(n)
    cdef double thresh = rel_tol * total
    cdef double skip = thresh / n
    cdef double off, apq, theta, t, c, s, app, aqq, akp, akq
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j] * a[i, j]
        off = sqrt(off)
        if off <= thresh:
            return np.sort(np.diagonal(a_arr))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if fabs(apq) <= skip:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                app = a[p, p]
                aqq = a[q, q]
                for i in range(n):
                    akp = a[i, p]
                    akq = a[i, q]
                    a[i, p] = c * akp - s * akq
                    a[i, q] = s * akp + c * akq
                for i in range(n):
                    a[p, i] = a[i, p]
                    a[q, i] = a[i, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
    raise NumericFailure("Jacobi iteration did not converge",
                         estimate=np.sort(np.diagonal(a_arr)))
