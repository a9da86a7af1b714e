"""Compiled right-hand sides on flat state vectors.

Flaschka vectors are laid out as ``[a_0..a_{N-1}, b_0..b_{N-1}]`` and physical
vectors as ``[p_0..p_{N-1}, q_0..q_{N-1}]``. Sites outside the stored window are
frozen at the background: ``(a, b) = (1/2, 0)`` and zero spring extension.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def rhs_ab_into(y, out):
    n = y.size // 2
    for i in range(n):
        a = y[i]
        b = y[n + i]
        b_right = y[n + i + 1] if i + 1 < n else 0.0
        a_left = y[i - 1] if i > 0 else 0.5
        out[i] = a * (b_right - b)
        out[n + i] = 2.0 * (a * a - a_left * a_left)


@njit(cache=True)
def force_into(q, out):
    """Toda force ``e^{-(q_n - q_{n-1})} - e^{-(q_{n+1} - q_n)}`` per site."""
    n = q.size
    left = 1.0
    for i in range(n):
        right = np.exp(-(q[i + 1] - q[i])) if i + 1 < n else 1.0
        out[i] = left - right
        left = right


@njit(cache=True)
def rhs_pq_into(y, out):
    n = y.size // 2
    force_into(y[n:], out[:n])
    for i in range(n):
        out[n + i] = y[i]


@njit(cache=True)
def rhs_ab_flat(y):
    out = np.empty_like(y)
    rhs_ab_into(y, out)
    return out


@njit(cache=True)
def rhs_pq_flat(y):
    out = np.empty_like(y)
    rhs_pq_into(y, out)
    return out


@njit(cache=True)
def spring_force(q):
    out = np.empty_like(q)
    force_into(q, out)
    return out


@njit(cache=True)
def all_finite(y):
    for i in range(y.size):
        if not np.isfinite(y[i]):
            return False
    return True


# -- fused in-place steppers --------------------------------------------------
# Each mirrors the floating-point operation order of the generic stepper in
# ``todalab.integrators`` so both paths produce identical iterates. ``y`` is
# updated in place; the return value is the 1-based index of the first step
# with a non-finite result, or 0.


@njit(cache=True)
def midpoint_steps(y, h, n_steps, rhs):
    k = np.empty_like(y)
    tmp = np.empty_like(y)
    for s in range(n_steps):
        rhs(y, k)
        for i in range(y.size):
            tmp[i] = y[i] + 0.5 * h * k[i]
        rhs(tmp, k)
        for i in range(y.size):
            y[i] = y[i] + h * k[i]
        if not all_finite(y):
            return s + 1
    return 0


@njit(cache=True)
def rk4_steps(y, h, n_steps, rhs):
    k = np.empty_like(y)
    acc = np.empty_like(y)
    tmp = np.empty_like(y)
    for s in range(n_steps):
        rhs(y, k)
        for i in range(y.size):
            si = h * k[i]
            acc[i] = si
            tmp[i] = y[i] + 0.5 * si
        rhs(tmp, k)
        for i in range(y.size):
            si = h * k[i]
            acc[i] = acc[i] + 2.0 * si
            tmp[i] = y[i] + 0.5 * si
        rhs(tmp, k)
        for i in range(y.size):
            si = h * k[i]
            acc[i] = acc[i] + 2.0 * si
            tmp[i] = y[i] + si
        rhs(tmp, k)
        for i in range(y.size):
            y[i] = y[i] + (acc[i] + h * k[i]) / 6.0
        if not all_finite(y):
            return s + 1
    return 0


@njit(cache=True)
def rkf45_steps(y, h, n_steps, rhs, b, c):
    m = y.size
    k = np.empty((6, m))
    tmp = np.empty_like(y)
    last = 6 if c[5] != 0.0 else 5
    for s in range(n_steps):
        rhs(y, k[0])
        for stage in range(1, last):
            for i in range(m):
                acc = b[stage, 0] * k[0, i]
                for j in range(1, stage):
                    acc = acc + b[stage, j] * k[j, i]
                tmp[i] = y[i] + h * acc
            rhs(tmp, k[stage])
        for i in range(m):
            acc = c[0] * k[0, i]
            for j in range(1, 5):
                acc = acc + c[j] * k[j, i]
            y[i] = y[i] + h * acc
            if last == 6:
                y[i] = y[i] + h * c[5] * k[5, i]
        if not all_finite(y):
            return s + 1
    return 0


@njit(cache=True)
def ab4_steps(y, h, n_steps, rhs, hist, n_hist, head, rows, rk4_start):
    """Adams-Bashforth steps over a ring buffer of f values.

    ``hist[head]`` is the newest stored value and ``n_hist`` (at most 4) the
    number stored. Returns ``(n_hist, head, bad_step)``.
    """
    m = y.size
    for s in range(n_steps):
        head = (head + 1) % 4
        rhs(y, hist[head])
        if n_hist < 4:
            n_hist += 1
        if n_hist < 4 and rk4_start:
            rk4_steps(y, h, 1, rhs)
        else:
            r0, r1, r2, r3 = rows[n_hist - 1]
            f3 = hist[head]
            f2 = hist[(head + 3) % 4]
            f1 = hist[(head + 2) % 4]
            f0 = hist[(head + 1) % 4]
            first = 4 - n_hist
            for i in range(m):
                acc = r3 * f3[i]
                if first <= 0:
                    acc = acc + r0 * f0[i]
                if first <= 1:
                    acc = acc + r1 * f1[i]
                if first <= 2:
                    acc = acc + r2 * f2[i]
                y[i] = y[i] + h * acc
        if not all_finite(y):
            return n_hist, head, s + 1
    return n_hist, head, 0


@njit(cache=True)
def sv2symp_steps(p, q, force, h, n_steps):
    """Stormer-Verlet: half kick, drift with the half-step momentum, half kick.

    ``force`` holds ``f_p(q)`` on entry and on exit; the closing kick of one
    step supplies the opening force of the next.
    """
    n = p.size
    for s in range(n_steps):
        for i in range(n):
            p[i] = p[i] + 0.5 * h * force[i]
            q[i] = q[i] + h * p[i]
        force_into(q, force)
        for i in range(n):
            p[i] = p[i] + 0.5 * h * force[i]
        if not (all_finite(p) and all_finite(q)):
            return s + 1
    return 0
