"""Fixed-step RK4 integration of the module chain, compiled with numba."""

import numba
import numpy as np


@numba.njit(cache=True)
def _tension(k1, k3, e, d):
    # spring force increment about the preloaded reference stretch e
    return k1 * d + k3 * d * (3.0 * e * e + 3.0 * e * d + d * d)


@numba.njit(cache=True)
def _accel(q, v, base, act, k1, k3, e, gains, m_inv, c, fext, out):
    n = q.shape[0]
    nch = gains.shape[0]
    for i in range(n):
        if i == 0:
            d = q[0] - base
        else:
            d = q[i] - q[i - 1]
        # segment i joins node i (free index i-1, or the base) to free node i
        t_above = _tension(k1[i], k3, e[i], d)
        for ch in range(nch):
            t_above += gains[ch, i] * act[ch]
        out[i] = (-t_above - c[i] * v[i] + fext[i]) * m_inv[i]
        if i > 0:
            out[i - 1] += t_above * m_inv[i - 1]


@numba.njit(cache=True)
def integrate(q0, v0, base, act, k1, k3, e, gains, masses, c, fext,
              h, n_steps, stride, x_bound, v_bound):
    """Integrate the free nodes; returns (record, record_v, q, v, fail_step).

    ``base`` and ``act`` hold the drive on the half-step grid
    (2 * n_steps + 1 points). ``record`` keeps every ``stride``-th state,
    starting with the initial one. ``fail_step`` is -1 on success.
    """
    n = q0.shape[0]
    nch = act.shape[0]
    n_rec = n_steps // stride + 1
    record = np.zeros((n, n_rec))
    record_v = np.zeros((n, n_rec))
    q = q0.copy()
    v = v0.copy()
    m_inv = 1.0 / masses
    k1q = np.empty(n)
    k1v = np.empty(n)
    k2q = np.empty(n)
    k2v = np.empty(n)
    k3q = np.empty(n)
    k3v = np.empty(n)
    k4q = np.empty(n)
    k4v = np.empty(n)
    tmpq = np.empty(n)
    tmpv = np.empty(n)
    a = np.empty(nch)
    for i in range(n):
        record[i, 0] = q[i]
        record_v[i, 0] = v[i]
    for step in range(n_steps):
        j = 2 * step
        for ch in range(nch):
            a[ch] = act[ch, j]
        _accel(q, v, base[j], a, k1, k3, e, gains, m_inv, c, fext, k1v)
        for i in range(n):
            k1q[i] = v[i]
            tmpq[i] = q[i] + 0.5 * h * k1q[i]
            tmpv[i] = v[i] + 0.5 * h * k1v[i]
        for ch in range(nch):
            a[ch] = act[ch, j + 1]
        _accel(tmpq, tmpv, base[j + 1], a, k1, k3, e, gains, m_inv, c, fext, k2v)
        for i in range(n):
            k2q[i] = tmpv[i]
            tmpq[i] = q[i] + 0.5 * h * k2q[i]
            tmpv[i] = v[i] + 0.5 * h * k2v[i]
        _accel(tmpq, tmpv, base[j + 1], a, k1, k3, e, gains, m_inv, c, fext, k3v)
        for i in range(n):
            k3q[i] = tmpv[i]
            tmpq[i] = q[i] + h * k3q[i]
            tmpv[i] = v[i] + h * k3v[i]
        for ch in range(nch):
            a[ch] = act[ch, j + 2]
        _accel(tmpq, tmpv, base[j + 2], a, k1, k3, e, gains, m_inv, c, fext, k4v)
        bad = False
        for i in range(n):
            k4q[i] = tmpv[i]
            q[i] += h / 6.0 * (k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i])
            v[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i])
            if not (abs(q[i]) <= x_bound and abs(v[i]) <= v_bound):
                bad = True
        if bad:
            return record, record_v, q, v, step + 1
        if (step + 1) % stride == 0:
            r = (step + 1) // stride
            for i in range(n):
                record[i, r] = q[i]
                record_v[i, r] = v[i]
    return record, record_v, q, v, -1


@numba.njit(cache=True)
def narma_recursion(u, order, a, b, g, d, classic, bound):
    """NARMA-N on input ``u``; returns (y, fail_step) with fail_step -1 if bounded."""
    n = u.shape[0]
    y = np.zeros(n)
    for t in range(order - 1, n - 1):
        if order == 2:
            nxt = 0.4 * y[t] + 0.4 * y[t] * y[t - 1] + 0.6 * u[t] ** 3 + 0.1
        else:
            s = 0.0
            for j in range(order):
                s += y[t - j] if classic else u[t - j]
            coef = b if classic else 5.0 * b
            nxt = a * y[t] + coef * y[t] * s + g * u[t - order + 1] * u[t] + d
        if not abs(nxt) <= bound:
            return y, t + 1
        y[t + 1] = nxt
    return y, -1
