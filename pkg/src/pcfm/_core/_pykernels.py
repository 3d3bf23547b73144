"""Pure numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` function for function and are used when the
compiled extension is unavailable or ``PCFM_PURE_PYTHON`` is set.
"""
import numpy as np

_CHUNK = 1 << 21


def _start_order(degree):
    return 2 * degree + 50


def phase_poly(q, phi):
    """Return ``sum_n q[n] * int_0^1 u**n exp(1j*phi*u) du`` for each ``phi``.

    Large ``|phi|`` uses the upward recurrence, which is stable once
    ``|phi|`` exceeds the degree; otherwise a downward recurrence started far
    above the degree is used, which also covers ``phi == 0`` exactly.
    """
    q = np.ascontiguousarray(q, dtype=float)
    phi = np.ascontiguousarray(phi, dtype=float)
    deg = q.size - 1
    out = np.zeros(phi.shape, dtype=complex)
    if q.size == 0:
        return out
    e = np.exp(1j * phi)
    up = np.abs(phi) > max(deg, 1)

    if up.any():
        ph = phi[up]
        eu = e[up]
        jphi = 1j * ph
        cur = (eu - 1.0) / jphi
        acc = q[0] * cur
        for n in range(1, deg + 1):
            cur = (eu - n * cur) / jphi
            acc = acc + q[n] * cur
        out[up] = acc

    down = ~up
    if down.any():
        ph = phi[down]
        ed = e[down]
        jphi = 1j * ph
        m = _start_order(deg)
        cur = ed / (m + 1)
        acc = np.zeros(ph.shape, dtype=complex)
        for n in range(m, 0, -1):
            if n <= deg:
                acc = acc + q[n] * cur
            cur = (ed - jphi * cur) / n
        acc = acc + q[0] * cur
        out[down] = acc
    return out


def _e01(phi):
    """Return ``int_0^1 exp(1j*phi*u) du`` and ``int_0^1 u exp(1j*phi*u) du``."""
    small = np.abs(phi) < 0.5
    e0 = np.empty(phi.shape, dtype=complex)
    e1 = np.empty(phi.shape, dtype=complex)
    if small.any():
        ps = phi[small]
        term = np.ones(ps.shape, dtype=complex)
        s0 = np.zeros(ps.shape, dtype=complex)
        s1 = np.zeros(ps.shape, dtype=complex)
        for k in range(18):
            s0 += term / (k + 1)
            s1 += term / (k + 2)
            term = term * (1j * ps) / (k + 1)
        e0[small] = s0
        e1[small] = s1
    big = ~small
    if big.any():
        pb = phi[big]
        ex = np.exp(1j * pb)
        a = (ex - 1.0) / (1j * pb)
        e0[big] = a
        e1[big] = (ex - a) / (1j * pb)
    return e0, e1


def phase_filon(z, p, theta):
    """Return ``int p(z) exp(1j*theta*z) dz`` for the piecewise-linear interpolant of ``(z, p)``."""
    z = np.ascontiguousarray(z, dtype=float)
    p = np.ascontiguousarray(p, dtype=float)
    theta = np.ascontiguousarray(theta, dtype=float)
    h = np.diff(z)
    keep = h > 0
    z0 = z[:-1][keep]
    h = h[keep]
    pa = p[:-1][keep]
    pb = p[1:][keep]
    out = np.empty(theta.shape, dtype=complex)
    step = max(1, _CHUNK // max(h.size, 1))
    for s in range(0, theta.size, step):
        th = theta[s:s + step, None]
        phi = th * h[None, :]
        e0, e1 = _e01(phi.ravel())
        e0 = e0.reshape(phi.shape)
        e1 = e1.reshape(phi.shape)
        seg = h * (pa * (e0 - e1) + pb * e1) * np.exp(1j * th * z0[None, :])
        out[s:s + step] = seg.sum(axis=1)
    return out


def _rhs(y, alpha, c_self, c_other, o, sign):
    return sign * y * (-alpha + c_self @ y + c_other @ o)


def rk4_sweep(z, y0, alpha, c_self, c_other, other, other_d, sign, reverse, jump_fac):
    """Integrate ``dy/dz = sign * y * (-alpha + c_self y + c_other o(z))`` over the nodes ``z``.

    ``other``/``other_d`` hold the frozen counter-family values and their
    z-derivatives at the nodes; midpoints use cubic Hermite interpolation.
    ``jump_fac[k]`` multiplies the state after crossing the interval that
    ends (forward) or starts (reverse) at node ``k``.

    Returns ``(y, dy)`` with shapes ``(n, M)``; ``dy`` is ``dy/dz`` at the nodes.
    Raises ``FloatingPointError`` on a non-positive or non-finite state.
    """
    z = np.asarray(z, dtype=float)
    n = len(y0)
    M = z.size
    y = np.empty((n, M))
    dy = np.empty((n, M))
    alpha = np.asarray(alpha, dtype=float)
    c_self = np.asarray(c_self, dtype=float)
    c_other = np.asarray(c_other, dtype=float)
    other = np.asarray(other, dtype=float)
    other_d = np.asarray(other_d, dtype=float)
    jump_fac = np.asarray(jump_fac, dtype=float)

    order = range(M - 1, 0, -1) if reverse else range(0, M - 1)
    k0 = M - 1 if reverse else 0
    cur = np.array(y0, dtype=float)
    y[:, k0] = cur
    dy[:, k0] = _rhs(cur, alpha, c_self, c_other, other[:, k0], sign)
    for k in order:
        k1 = k - 1 if reverse else k + 1
        h = z[k1] - z[k]
        oa, ob = other[:, k], other[:, k1]
        lo, hi = (k1, k) if reverse else (k, k1)
        span = z[hi] - z[lo]
        om = 0.5 * (other[:, lo] + other[:, hi]) + span * (other_d[:, lo] - other_d[:, hi]) / 8.0
        s1 = _rhs(cur, alpha, c_self, c_other, oa, sign)
        s2 = _rhs(cur + 0.5 * h * s1, alpha, c_self, c_other, om, sign)
        s3 = _rhs(cur + 0.5 * h * s2, alpha, c_self, c_other, om, sign)
        s4 = _rhs(cur + h * s3, alpha, c_self, c_other, ob, sign)
        cur = cur + h / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4)
        cur = cur * jump_fac[:, hi]
        if not np.all(np.isfinite(cur)) or np.any(cur <= 0.0):
            raise FloatingPointError(f"non-positive power after step to z={z[k1]:.6g} km")
        y[:, k1] = cur
        dy[:, k1] = _rhs(cur, alpha, c_self, c_other, ob, sign)
    return y, dy
