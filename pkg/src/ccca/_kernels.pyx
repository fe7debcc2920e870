# cython: language_level=3
"""Compiled hot kernels; see ``_kernels_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport erfc, exp, fabs

cnp.import_array()

cdef double _SQRT1_2 = 0.7071067811865476
cdef double _INV_2PI = 0.15915494309189535


cdef inline double _ndtr(double t) nogil:
    return 0.5 * erfc(-t * _SQRT1_2)


def smoothed_cdf(sample, points, double h):
    cdef const double[::1] s = np.ascontiguousarray(sample, dtype=np.float64)
    cdef const double[::1] z = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = s.shape[0], q = z.shape[0], i, j
    out = np.empty(q, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc, inv_h = 1.0 / h
    with nogil:
        for i in range(q):
            acc = 0.0
            for j in range(n):
                acc = acc + _ndtr((z[i] - s[j]) * inv_h)
            o[i] = acc / n
    return out


def smoothed_cdf_at_samples(y, double h):
    cdef const double[::1] s = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = s.shape[0], i, j
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double p, inv_h = 1.0 / h
    with nogil:
        for i in range(n):
            o[i] += 0.5
            for j in range(i + 1, n):
                p = _ndtr((s[i] - s[j]) * inv_h)
                o[i] += p
                o[j] += 1.0 - p
        for i in range(n):
            o[i] = o[i] / n
    return out


def copula_kde(d1, d2, q1, q2, double H1, double H2):
    cdef const double[::1] a = np.ascontiguousarray(d1, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(d2, dtype=np.float64)
    cdef const double[::1] x = np.ascontiguousarray(q1, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(q2, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0], q = x.shape[0], i, j
    out = np.empty(q, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc, t1, t2, i1 = 1.0 / H1, i2 = 1.0 / H2
    cdef double scale = _INV_2PI / (n * H1 * H2)
    with nogil:
        for i in range(q):
            acc = 0.0
            for j in range(n):
                t1 = (x[i] - a[j]) * i1
                t2 = (y[i] - b[j]) * i2
                acc = acc + exp(-0.5 * (t1 * t1 + t2 * t2))
            o[i] = acc * scale
    return out


def copula_kde_at_samples(u1, u2, double H1, double H2):
    cdef const double[::1] a = np.ascontiguousarray(u1, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(u2, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0], i, j
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double e, t1, t2, i1 = 1.0 / H1, i2 = 1.0 / H2
    cdef double scale = _INV_2PI / (n * H1 * H2)
    with nogil:
        for i in range(n):
            o[i] += 1.0
            for j in range(i + 1, n):
                t1 = (a[i] - a[j]) * i1
                t2 = (b[i] - b[j]) * i2
                e = exp(-0.5 * (t1 * t1 + t2 * t2))
                o[i] += e
                o[j] += e
        for i in range(n):
            o[i] = o[i] * scale
    return out


def empirical_copula_counts(du, dv):
    """Fenwick-tree sweep over increasing ``du``; O(n log n)."""
    cdef const cnp.int64_t[::1] U = np.ascontiguousarray(du, dtype=np.int64)
    cdef const cnp.int64_t[::1] V = np.ascontiguousarray(dv, dtype=np.int64)
    cdef Py_ssize_t n = U.shape[0]
    cdef const cnp.int64_t[::1] order = np.ascontiguousarray(
        np.argsort(np.asarray(U), kind="stable"), dtype=np.int64)
    cdef cnp.int64_t size = 0
    cdef Py_ssize_t t
    for t in range(n):
        if V[t] + 1 > size:
            size = V[t] + 1
    tree_arr = np.zeros(size + 1, dtype=np.int64)
    out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] tree = tree_arr
    cdef cnp.int64_t[::1] o = out
    cdef Py_ssize_t g0 = 0, g1, p
    cdef cnp.int64_t idx, acc
    with nogil:
        while g0 < n:
            g1 = g0
            while g1 < n and U[order[g1]] == U[order[g0]]:
                g1 += 1
            for p in range(g0, g1):
                idx = V[order[p]] + 1
                while idx <= size:
                    tree[idx] += 1
                    idx += idx & (-idx)
            for p in range(g0, g1):
                idx = V[order[p]] + 1
                acc = 0
                while idx > 0:
                    acc += tree[idx]
                    idx -= idx & (-idx)
                o[order[p]] = acc
            g0 = g1
    return out


cdef double _lambda_scaled(cnp.int64_t k, cnp.int64_t U2, cnp.int64_t V2, Py_ssize_t n) nogil:
    cdef double c = 4.0 * n * k
    cdef double prod = (<double>U2) * (<double>V2)
    cdef double bound, den
    if c >= prod:
        bound = 2.0 * n * (U2 if U2 < V2 else V2)
    else:
        bound = 2.0 * n * (U2 + V2) - 4.0 * n * n
        if bound < 0.0:
            bound = 0.0
    den = bound - prod
    if den == 0.0:
        return 0.0
    if (c - bound) * den >= 0.0:
        return 1.0
    return (c - prod) / den


def cos_core(k, U2, V2):
    cdef const cnp.int64_t[::1] K = np.ascontiguousarray(k, dtype=np.int64)
    cdef const cnp.int64_t[::1] A = np.ascontiguousarray(U2, dtype=np.int64)
    cdef const cnp.int64_t[::1] B = np.ascontiguousarray(V2, dtype=np.int64)
    cdef Py_ssize_t n = K.shape[0]
    starts_arr = np.empty(n, dtype=np.int64)
    ends_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] starts = starts_arr
    cdef cnp.int64_t[::1] ends = ends_arr
    cdef Py_ssize_t m = 0, start = 0, j, i, a, b, jmin, jmax, size, pair, jj, t
    cdef int direction = 0, s
    cdef cnp.int64_t d, two_n = 2 * n
    cdef double lmin, lmax, gamma, total = 0.0
    with nogil:
        for j in range(1, n):
            d = K[j] - K[j - 1]
            if d == 0:
                continue
            s = 1 if d > 0 else -1
            if direction == 0:
                direction = s
            elif s != direction:
                starts[m] = start
                ends[m] = j - 1
                m += 1
                start = j - 1
                direction = s
        starts[m] = start
        ends[m] = n - 1
        m += 1

        for i in range(m):
            a = starts[i]
            b = ends[i]
            jmin = -1
            jmax = -1
            for j in range(a, b + 1):
                if A[j] == two_n or B[j] == two_n:
                    continue
                if jmin < 0 or K[j] < K[jmin]:
                    jmin = j
                if jmax < 0 or K[j] > K[jmax]:
                    jmax = j
            size = b - a + 1
            if jmin < 0:
                continue
            lmin = _lambda_scaled(K[jmin], A[jmin], B[jmin], n)
            lmax = _lambda_scaled(K[jmax], A[jmax], B[jmax], n)
            if lmin == 1.0 and lmax == 1.0:
                gamma = 1.0
            else:
                gamma = 0.5 * (lmin + lmax)
                pair = size
                if i + 1 < m:
                    pair = pair + ends[i + 1] - starts[i + 1] + 1
                if pair > 4:
                    for t in range(2):
                        jj = jmin if t == 0 else jmax
                        if 0 < jj < n - 1 and fabs(<double>(K[jj] - K[jj - 1])) <= 1.0 \
                                and fabs(<double>(K[jj + 1] - K[jj])) <= 1.0:
                            gamma = 1.0
                            break
            total += size * gamma
    return total / (n + m - 1), int(m)
