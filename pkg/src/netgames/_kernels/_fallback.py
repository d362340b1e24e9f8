"""Pure numpy implementation of the hot kernels.

Semantics must match netgames._kernels._core exactly (same update order,
same strict-inequality gates, same stopping rules); only floating-point
association may differ.
"""

import numpy as np

from ..errors import NumericFailure

BACKEND = "python"

_CONV_ABS = 1e-8
_CONV_REL = 1e-5


def _phi(a, beta, msym):
    return float(-0.5 * (a @ a) + beta @ a + 0.5 * (a @ (msym @ a)))


class _Recorder:
    def __init__(self, record_every, n):
        self.every = max(int(record_every), 1)
        self.idx = []
        self.profiles = []

    def maybe(self, k, a):
        if k % self.every == 0:
            self.idx.append(k)
            self.profiles.append(a.copy())

    def finish(self, k, a):
        if not self.idx or self.idx[-1] != k:
            self.idx.append(k)
            self.profiles.append(a.copy())
        return (np.asarray(self.idx, dtype=np.int64),
                np.asarray(self.profiles, dtype=np.float64))


def run_br(mgrad, msym, beta, lo, hi, a0, gate, sel_mode, rand_u, max_iters,
           record_every, stop_on_converged):
    """Sequential best-response with an improvement gate.

    At most one player moves per iteration.  Selection modes: 0 picks the
    first eligible player cyclically after the previous updater; 1 wakes a
    uniformly random player (driven by ``rand_u``); 2 visits players in
    strict round-robin order (player k mod n at iteration k).  Under modes
    1 and 2 an iteration is a no-op when the woken player does not clear
    the gate.  Eligibility is utility improvement strictly greater than
    ``gate``.  ``last_violation`` in the return value is the last iteration
    whose step broke the relative convergence criterion.
    """
    n = a0.size
    a = a0.copy()
    phi_step = np.empty(max_iters + 1)
    phi_step[0] = _phi(a, beta, msym)
    rec = _Recorder(record_every, n)
    last = n - 1
    first_conv = -1
    last_violation = -1
    min_gain = np.inf
    max_drop = 0.0
    term = 1
    iters = max_iters
    for k in range(max_iters):
        rec.maybe(k, a)
        x = beta + mgrad @ a
        br = np.clip(x, lo, hi)
        imp = 0.5 * ((a - x) ** 2 - (br - x) ** 2)
        eligible = imp > gate
        if not eligible.any():
            term = 0
            iters = k
            if first_conv < 0:
                first_conv = k
            break
        if sel_mode == 0:
            order = (np.arange(1, n + 1) + last) % n
            i = int(order[eligible[order]][0])
        else:
            i = min(int(rand_u[k] * n), n - 1) if sel_mode == 1 else k % n
            if not eligible[i]:
                phi_step[k + 1] = phi_step[k]
                if first_conv < 0:
                    first_conv = k
                continue
        old = a[i]
        a[i] = br[i]
        last = i
        phi_new = _phi(a, beta, msym)
        gain = phi_new - phi_step[k]
        min_gain = min(min_gain, gain)
        max_drop = max(max_drop, -gain)
        phi_step[k + 1] = phi_new
        conv = abs(a[i] - old) <= _CONV_ABS + _CONV_REL * abs(old)
        if conv:
            if first_conv < 0:
                first_conv = k
        else:
            last_violation = k
        if stop_on_converged and conv:
            term = 2
            iters = k + 1
            break
    rec_idx, rec_profiles = rec.finish(iters, a)
    return (a, iters, term, rec_idx, rec_profiles, phi_step[:iters + 1],
            first_conv, min_gain, max_drop, last_violation)


def run_gp(mgrad, msym, beta, lo, hi, a0, gate, etas, stop_mode, step_tol,
           max_iters, record_every):
    """Simultaneous projected gradient step with a gradient-magnitude gate.

    All gradients are read from the current profile before any player moves.
    ``gate < 0`` disables the gate (every player updates each iteration).
    Stop modes: 0 halt on an exactly fixed profile; 1 halt on the relative
    convergence criterion; 2 halt when the step infinity norm is at most
    ``step_tol``.
    """
    a = a0.copy()
    phi_step = np.empty(max_iters + 1)
    phi_step[0] = _phi(a, beta, msym)
    rec = _Recorder(record_every, a.size)
    first_conv = -1
    last_violation = -1
    min_gain = np.inf
    max_drop = 0.0
    term = 1
    iters = max_iters
    for k in range(max_iters):
        rec.maybe(k, a)
        g = -a + beta + mgrad @ a
        if gate >= 0.0:
            fire = np.abs(g) > gate
        else:
            fire = np.ones(a.size, dtype=bool)
        a_new = np.where(fire, np.clip(a + etas * g, lo, hi), a)
        diff = np.abs(a_new - a)
        conv = bool(np.all(diff <= _CONV_ABS + _CONV_REL * np.abs(a)))
        if conv:
            if first_conv < 0:
                first_conv = k
        else:
            last_violation = k
        if stop_mode == 0 and not np.any(a_new != a):
            term = 0
            iters = k
            break
        step = float(diff.max())
        a = a_new
        phi_new = _phi(a, beta, msym)
        gain = phi_new - phi_step[k]
        if step > 0.0:
            min_gain = min(min_gain, gain)
        max_drop = max(max_drop, -gain)
        phi_step[k + 1] = phi_new
        if stop_mode == 1 and conv:
            term = 2
            iters = k + 1
            break
        if stop_mode == 2 and step <= step_tol:
            term = 2
            iters = k + 1
            break
    rec_idx, rec_profiles = rec.finish(iters, a)
    return (a, iters, term, rec_idx, rec_profiles, phi_step[:iters + 1],
            first_conv, min_gain, max_drop, last_violation)


def deviation_scan(mgrad, msym, beta, i_idx, profiles, new_actions):
    """Max of |[u_i(a) - u_i(a'_i, a_-i)] - [phi(a) - phi(a'_i, a_-i)]|.

    Both sides are evaluated from their definitions (no algebraic shortcut)
    so the scan stays an independent check of the potential property.
    """
    m = i_idx.size
    rows = np.arange(m)
    z = (mgrad[i_idx] * profiles).sum(axis=1)
    ai = profiles[rows, i_idx]
    ap = new_actions
    bi = beta[i_idx]
    u0 = -0.5 * ai * ai + bi * ai + z * ai
    u1 = -0.5 * ap * ap + bi * ap + z * ap
    phi0 = (-0.5 * (profiles * profiles).sum(axis=1) + profiles @ beta
            + 0.5 * ((profiles @ msym) * profiles).sum(axis=1))
    deviated = profiles.copy()
    deviated[rows, i_idx] = ap
    phi1 = (-0.5 * (deviated * deviated).sum(axis=1) + deviated @ beta
            + 0.5 * ((deviated @ msym) * deviated).sum(axis=1))
    return float(np.abs((u0 - u1) - (phi0 - phi1)).max())


def jacobi_spectrum(mat, rel_tol=1e-12, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm is at most
    ``rel_tol * ||M||_F``.  Returns the spectrum sorted ascending.
    """
    a = np.array(mat, dtype=np.float64)
    n = a.shape[0]
    if n == 1:
        return a.diagonal().copy()
    total = float(np.linalg.norm(a))
    if total == 0.0:
        return np.zeros(n)
    thresh = rel_tol * total
    skip = thresh / n  # entries this small cannot push the off-norm past thresh
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a[off_mask]))
        if off <= thresh:
            return np.sort(a.diagonal())
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                app = a[p, p]
                aqq = a[q, q]
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                newp = c * colp - s * colq
                newq = s * colp + c * colq
                a[:, p] = newp
                a[p, :] = newp
                a[:, q] = newq
                a[q, :] = newq
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
    raise NumericFailure("Jacobi iteration did not converge",
                         estimate=np.sort(a.diagonal()))
