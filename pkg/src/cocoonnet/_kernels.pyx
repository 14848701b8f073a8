# cython: language_level=3
"""Compiled versions of the kernels in ``_pure.py`` (same signatures)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()

NAME = "cython"


def jacobi_eigh(a, double tol, int max_sweeps):
    cdef double[:, ::1] m = np.array(a, dtype=np.float64, order="C")
    cdef Py_ssize_t n = m.shape[0]
    vv = np.eye(n)
    cdef double[:, ::1] v = vv
    cdef Py_ssize_t p, q, r
    cdef int sweep
    cdef double apq, theta, t, c, s, tau, arp, arq, total, diag, off, target
    cdef double app, aqq

    total = 0.0
    for p in range(n):
        for q in range(n):
            total += m[p, q] * m[p, q]
    target = tol * sqrt(total)

    for sweep in range(max_sweeps + 1):
        total = 0.0
        diag = 0.0
        for p in range(n):
            diag += m[p, p] * m[p, p]
            for q in range(n):
                total += m[p, q] * m[p, q]
        off = total - diag
        if off < 0:
            off = 0.0
        if sqrt(off) <= target:
            return np.array([m[p, p] for p in range(n)]), vv, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if apq == 0.0:
                    continue
                app = m[p, p]
                aqq = m[q, q]
                if fabs(aqq - app) > 1e150 * fabs(apq):
                    # theta*theta would overflow; t ~ 1 / (2 theta)
                    t = apq / (aqq - app)
                else:
                    theta = (aqq - app) / (2.0 * apq)
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                for r in range(n):
                    if r == p or r == q:
                        continue
                    arp = m[r, p]
                    arq = m[r, q]
                    m[r, p] = arp - s * (arq + tau * arp)
                    m[r, q] = arq + s * (arp - tau * arq)
                    m[p, r] = m[r, p]
                    m[q, r] = m[r, q]
                m[p, p] = app - t * apq
                m[q, q] = aqq + t * apq
                m[p, q] = 0.0
                m[q, p] = 0.0
                for r in range(n):
                    arp = v[r, p]
                    arq = v[r, q]
                    v[r, p] = arp - s * (arq + tau * arp)
                    v[r, q] = arq + s * (arp - tau * arq)
    return np.array([m[p, p] for p in range(n)]), vv, -1


cdef void _rates(const cnp.int64_t[::1] indptr1, const cnp.int64_t[::1] indices1,
                 const cnp.int64_t[::1] indptr2, const cnp.int64_t[::1] indices2,
                 const signed char[::1] att, const signed char[::1] sus,
                 double alpha, double gamma1, double diff_rate, double gamma2,
                 double[::1] lp, double[::1] ln, double[::1] ls) noexcept nogil:
    cdef Py_ssize_t i, e, n = att.shape[0]
    cdef double f1, f2, pp, pn, ps
    for i in range(n):
        f1 = 1.0 - (gamma1 if sus[i] == 1 else 1.0) * alpha
        pp = 1.0
        pn = 1.0
        for e in range(indptr1[i], indptr1[i + 1]):
            if att[indices1[e]] == 0:
                pp *= f1
            elif att[indices1[e]] == 2:
                pn *= f1
        f2 = 1.0 - (gamma2 if att[i] == 1 else 1.0) * diff_rate
        ps = 1.0
        for e in range(indptr2[i], indptr2[i + 1]):
            if sus[indices2[e]] == 1:
                ps *= f2
        lp[i] = 1.0 - pp
        ln[i] = 1.0 - pn
        ls[i] = 1.0 - ps


def transition_rates(indptr1, indices1, indptr2, indices2, att, sus,
                     double alpha, double gamma1, double diff_rate, double gamma2):
    n = len(att)
    lp = np.empty(n)
    ln = np.empty(n)
    ls = np.empty(n)
    _rates(np.ascontiguousarray(indptr1, dtype=np.int64),
           np.ascontiguousarray(indices1, dtype=np.int64),
           np.ascontiguousarray(indptr2, dtype=np.int64),
           np.ascontiguousarray(indices2, dtype=np.int64),
           np.ascontiguousarray(att, dtype=np.int8),
           np.ascontiguousarray(sus, dtype=np.int8),
           alpha, gamma1, diff_rate, gamma2, lp, ln, ls)
    return lp, ln, ls


def sim_step(indptr1, indices1, indptr2, indices2, att, sus, frozen, u1, u2, u3,
             double alpha, double beta, double r1, double gamma1,
             double diff_rate, double s_rate, double r2, double gamma2):
    cdef const signed char[::1] a0 = np.ascontiguousarray(att, dtype=np.int8)
    cdef const signed char[::1] s0 = np.ascontiguousarray(sus, dtype=np.int8)
    cdef const unsigned char[::1] fz = np.ascontiguousarray(frozen, dtype=np.uint8)
    cdef const double[::1] d1 = np.ascontiguousarray(u1, dtype=np.float64)
    cdef const double[::1] d2 = np.ascontiguousarray(u2, dtype=np.float64)
    cdef const double[::1] d3 = np.ascontiguousarray(u3, dtype=np.float64)
    cdef Py_ssize_t i, n = a0.shape[0]
    new_att = np.empty(n, dtype=np.int8)
    new_sus = np.empty(n, dtype=np.int8)
    cdef signed char[::1] a1 = new_att
    cdef signed char[::1] s1 = new_sus
    cdef double[::1] lp = np.empty(n)
    cdef double[::1] ln = np.empty(n)
    cdef double[::1] ls = np.empty(n)
    _rates(np.ascontiguousarray(indptr1, dtype=np.int64),
           np.ascontiguousarray(indices1, dtype=np.int64),
           np.ascontiguousarray(indptr2, dtype=np.int64),
           np.ascontiguousarray(indices2, dtype=np.int64),
           a0, s0, alpha, gamma1, diff_rate, gamma2, lp, ln, ls)
    with nogil:
        for i in range(n):
            a1[i] = a0[i]
            if fz[i] == 0:
                if a0[i] == 0:
                    if d1[i] < beta * ln[i]:
                        a1[i] = 1
                elif a0[i] == 2:
                    if d1[i] < beta * lp[i]:
                        a1[i] = 1
                else:
                    if d1[i] < r1 * lp[i]:
                        a1[i] = 0
                    elif d1[i] < r1 * lp[i] + r1 * ln[i]:
                        a1[i] = 2
            s1[i] = s0[i]
            if s0[i] == 1:
                if d2[i] < r2:
                    s1[i] = 0
            elif d2[i] < ls[i]:
                s1[i] = 1
            if d3[i] < s_rate:
                s1[i] = 1 - s1[i]
    return new_att, new_sus
