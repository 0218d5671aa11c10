# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pairwise kernels for the factored objective.

Each routine walks node pairs once, forming ``Y_ij = <U_i, U_j>`` on the fly,
so no dense n x n matrix is ever materialized.
"""

import numpy as np

from libc.math cimport fabs
from libc.stdint cimport int64_t


def snapshot_terms(const double[:, ::1] U, const int[::1] indptr, const int[::1] indices,
                   const double[::1] deg, double two_m, bint include_diag,
                   bint want_cap, bint cap_diag):
    cdef Py_ssize_t n = U.shape[0], r = U.shape[1]
    gq_arr = np.zeros((n, r))
    gc_arr = np.zeros((n, r))
    cdef double[:, ::1] gq = gq_arr
    cdef double[:, ::1] gc = gc_arr
    cdef double quality = 0.0, cap = 0.0
    cdef double y, a, c, diff, s, ki
    cdef Py_ssize_t i, j, l, p, pend
    with nogil:
        for i in range(n):
            ki = deg[i]
            p = indptr[i]
            pend = indptr[i + 1]
            while p < pend and indices[p] <= i:
                p += 1
            if include_diag or (want_cap and cap_diag):
                y = 0.0
                for l in range(r):
                    y = y + U[i, l] * U[i, l]
                if include_diag:
                    c = fabs(1.0 - ki * ki / two_m)
                    diff = y - 1.0
                    if diff != 0.0:
                        quality -= c * fabs(diff)
                        s = -2.0 * c if diff > 0.0 else 2.0 * c
                        for l in range(r):
                            gq[i, l] += s * U[i, l]
                if want_cap and cap_diag and y > 1.0:
                    cap += y - 1.0
                    for l in range(r):
                        gc[i, l] += 2.0 * U[i, l]
            for j in range(i + 1, n):
                y = 0.0
                for l in range(r):
                    y = y + U[i, l] * U[j, l]
                if p < pend and indices[p] == j:
                    a = 1.0
                    p += 1
                else:
                    a = 0.0
                c = fabs(a - ki * deg[j] / two_m)
                diff = y - a
                if diff != 0.0 and c != 0.0:
                    quality -= 2.0 * c * fabs(diff)
                    s = -2.0 * c if diff > 0.0 else 2.0 * c
                    for l in range(r):
                        gq[i, l] += s * U[j, l]
                        gq[j, l] += s * U[i, l]
                if want_cap and y > 1.0:
                    cap += 2.0 * (y - 1.0)
                    for l in range(r):
                        gc[i, l] += 2.0 * U[j, l]
                        gc[j, l] += 2.0 * U[i, l]
    return quality, gq_arr, cap, gc_arr


def persist_terms(const double[:, ::1] Ua, const double[:, ::1] Ub,
                  const int64_t[::1] rows, const int64_t[::1] cols, bint include_diag):
    cdef Py_ssize_t n = Ua.shape[0], r = Ua.shape[1], m = rows.shape[0]
    ga_arr = np.zeros((n, r))
    gb_arr = np.zeros((n, Ub.shape[1]))
    cdef double[:, ::1] ga = ga_arr
    cdef double[:, ::1] gb = gb_arr
    cdef Py_ssize_t rb = Ub.shape[1]
    cdef double dist = 0.0, ya, yb, s
    cdef Py_ssize_t e, i, j, l
    with nogil:
        for e in range(m):
            i = rows[e]
            j = cols[e]
            ya = 0.0
            for l in range(r):
                ya = ya + Ua[i, l] * Ua[j, l]
            yb = 0.0
            for l in range(rb):
                yb = yb + Ub[i, l] * Ub[j, l]
            if ya == yb:
                continue
            dist += 2.0 * fabs(ya - yb)
            s = 2.0 if ya > yb else -2.0
            for l in range(r):
                ga[i, l] += s * Ua[j, l]
                ga[j, l] += s * Ua[i, l]
            for l in range(rb):
                gb[i, l] -= s * Ub[j, l]
                gb[j, l] -= s * Ub[i, l]
        if include_diag:
            for i in range(n):
                ya = 0.0
                for l in range(r):
                    ya = ya + Ua[i, l] * Ua[i, l]
                yb = 0.0
                for l in range(rb):
                    yb = yb + Ub[i, l] * Ub[i, l]
                if ya == yb:
                    continue
                dist += fabs(ya - yb)
                s = 2.0 if ya > yb else -2.0
                for l in range(r):
                    ga[i, l] += s * Ua[i, l]
                for l in range(rb):
                    gb[i, l] -= s * Ub[i, l]
    return dist, ga_arr, gb_arr
