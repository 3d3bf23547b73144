# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, cos, sin, isfinite

cnp.import_array()


cdef inline double complex cexpi(double x) nogil:
    return cos(x) + 1j * sin(x)


def phase_poly(q, phi):
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(phi, dtype=np.float64).ravel()
    cdef Py_ssize_t nphi = pv.shape[0]
    cdef Py_ssize_t deg = qv.shape[0] - 1
    out_arr = np.zeros(nphi, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t i, n, m
    cdef double ph, thr
    cdef double complex e, jphi, cur, acc
    if deg < 0:
        return out_arr.reshape(np.shape(phi))
    thr = deg if deg > 1 else 1.0
    m = 2 * deg + 50
    with nogil:
        for i in range(nphi):
            ph = pv[i]
            e = cexpi(ph)
            jphi = 1j * ph
            if fabs(ph) > thr:
                cur = (e - 1.0) / jphi
                acc = qv[0] * cur
                for n in range(1, deg + 1):
                    cur = (e - n * cur) / jphi
                    acc = acc + qv[n] * cur
            else:
                cur = e / (m + 1)
                acc = 0
                for n in range(m, 0, -1):
                    if n <= deg:
                        acc = acc + qv[n] * cur
                    cur = (e - jphi * cur) / n
                acc = acc + qv[0] * cur
            out[i] = acc
    return out_arr.reshape(np.shape(phi))


cdef inline void e01(double ph, double complex* e0, double complex* e1) nogil:
    cdef double complex term, s0, s1, ex, a
    cdef int k
    if fabs(ph) < 0.5:
        term = 1.0
        s0 = 0
        s1 = 0
        for k in range(18):
            s0 = s0 + term * (1.0 / (k + 1))
            s1 = s1 + term * (1.0 / (k + 2))
            term = term * (1j * ph * (1.0 / (k + 1)))
        e0[0] = s0
        e1[0] = s1
    else:
        ex = cexpi(ph)
        a = (ex - 1.0) / (1j * ph)
        e0[0] = a
        e1[0] = (ex - a) / (1j * ph)


def phase_filon(z, p, theta):
    cdef const double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(theta, dtype=np.float64).ravel()
    cdef Py_ssize_t nt = tv.shape[0]
    cdef Py_ssize_t nz = zv.shape[0]
    out_arr = np.zeros(nt, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t i, s
    cdef double th, h, h_prev
    cdef double complex acc, e0, e1, rot, step
    with nogil:
        for i in range(nt):
            th = tv[i]
            acc = 0
            h_prev = -1.0
            rot = cexpi(th * zv[0])
            step = 1.0
            for s in range(nz - 1):
                h = zv[s + 1] - zv[s]
                if h <= 0:
                    continue
                # segment weights and the phase step only change with h
                if fabs(h - h_prev) > 1e-12 * h:
                    e01(th * h, &e0, &e1)
                    step = cexpi(th * h)
                    h_prev = h
                if s % 64 == 0:
                    rot = cexpi(th * zv[s])
                acc = acc + h * (pv[s] * (e0 - e1) + pv[s + 1] * e1) * rot
                rot = rot * step
            out[i] = acc
    return out_arr.reshape(np.shape(theta))


cdef inline void rhs(Py_ssize_t n, Py_ssize_t no, double[::1] y, const double[::1] alpha,
                     const double[:, ::1] cs, const double[:, ::1] co, double[::1] o,
                     double sign, double[::1] out) nogil:
    cdef Py_ssize_t i, j
    cdef double g
    for i in range(n):
        g = -alpha[i]
        for j in range(n):
            g += cs[i, j] * y[j]
        for j in range(no):
            g += co[i, j] * o[j]
        out[i] = sign * y[i] * g


def rk4_sweep(z, y0, alpha, c_self, c_other, other, other_d, sign, reverse, jump_fac):
    cdef const double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef const double[::1] av = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef const double[:, ::1] cs = np.ascontiguousarray(c_self, dtype=np.float64)
    cdef const double[:, ::1] co = np.ascontiguousarray(c_other, dtype=np.float64).reshape(len(y0), np.shape(c_other)[1] if np.ndim(c_other) == 2 else 0)
    cdef const double[:, ::1] ov = np.ascontiguousarray(other, dtype=np.float64).reshape(co.shape[1], len(zv))
    cdef const double[:, ::1] od = np.ascontiguousarray(other_d, dtype=np.float64).reshape(co.shape[1], len(zv))
    cdef const double[:, ::1] jf = np.ascontiguousarray(jump_fac, dtype=np.float64)
    cdef Py_ssize_t n = len(y0)
    cdef Py_ssize_t no = co.shape[1]
    cdef Py_ssize_t M = zv.shape[0]
    cdef double sg = sign
    cdef bint rev = reverse
    y_arr = np.empty((n, M))
    dy_arr = np.empty((n, M))
    cdef double[:, ::1] y = y_arr
    cdef double[:, ::1] dy = dy_arr
    cdef double[::1] cur = np.array(y0, dtype=np.float64)
    cdef double[::1] tmp = np.empty(n)
    cdef double[::1] s1 = np.empty(n)
    cdef double[::1] s2 = np.empty(n)
    cdef double[::1] s3 = np.empty(n)
    cdef double[::1] s4 = np.empty(n)
    cdef double[::1] oa = np.empty(no)
    cdef double[::1] ob = np.empty(no)
    cdef double[::1] om = np.empty(no)
    cdef Py_ssize_t i, step, k, k1, lo, hi, k0
    cdef double h, span
    cdef bint bad = False
    cdef double bad_z = 0.0

    k0 = M - 1 if rev else 0
    for i in range(no):
        oa[i] = ov[i, k0]
    rhs(n, no, cur, av, cs, co, oa, sg, s1)
    for i in range(n):
        y[i, k0] = cur[i]
        dy[i, k0] = s1[i]
    with nogil:
        for step in range(M - 1):
            if rev:
                k = M - 1 - step
                k1 = k - 1
                lo = k1
                hi = k
            else:
                k = step
                k1 = k + 1
                lo = k
                hi = k1
            h = zv[k1] - zv[k]
            span = zv[hi] - zv[lo]
            for i in range(no):
                oa[i] = ov[i, k]
                ob[i] = ov[i, k1]
                om[i] = 0.5 * (ov[i, lo] + ov[i, hi]) + span * (od[i, lo] - od[i, hi]) / 8.0
            rhs(n, no, cur, av, cs, co, oa, sg, s1)
            for i in range(n):
                tmp[i] = cur[i] + 0.5 * h * s1[i]
            rhs(n, no, tmp, av, cs, co, om, sg, s2)
            for i in range(n):
                tmp[i] = cur[i] + 0.5 * h * s2[i]
            rhs(n, no, tmp, av, cs, co, om, sg, s3)
            for i in range(n):
                tmp[i] = cur[i] + h * s3[i]
            rhs(n, no, tmp, av, cs, co, ob, sg, s4)
            for i in range(n):
                cur[i] = (cur[i] + h / 6.0 * (s1[i] + 2.0 * s2[i] + 2.0 * s3[i] + s4[i])) * jf[i, hi]
                if not isfinite(cur[i]) or cur[i] <= 0.0:
                    bad = True
            if bad:
                bad_z = zv[k1]
                break
            rhs(n, no, cur, av, cs, co, ob, sg, s1)
            for i in range(n):
                y[i, k1] = cur[i]
                dy[i, k1] = s1[i]
    if bad:
        raise FloatingPointError(f"non-positive power after step to z={bad_z:.6g} km")
    return y_arr, dy_arr
