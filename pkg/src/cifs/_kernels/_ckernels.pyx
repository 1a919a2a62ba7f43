# cython: language_level=3
"""Compiled versions of the kernels in ``_pykernels``; same signatures and results."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, INFINITY

cnp.import_array()


def chaos_orbit(const double[::1] ratios, const double[:, ::1] translations,
                const cnp.int64_t[::1] indices, const double[::1] x0, Py_ssize_t burn_in):
    cdef Py_ssize_t T = indices.shape[0]
    cdef Py_ssize_t d = translations.shape[1]
    cdef Py_ssize_t n_out = T - burn_in if T > burn_in else 0
    out_arr = np.empty((n_out, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] x = np.array(x0, dtype=np.float64, copy=True)
    cdef Py_ssize_t t, j
    cdef cnp.int64_t k
    cdef double rk
    with nogil:
        for t in range(T):
            k = indices[t]
            rk = ratios[k]
            for j in range(d):
                x[j] = rk * x[j] + translations[k, j]
            if t >= burn_in:
                for j in range(d):
                    out[t - burn_in, j] = x[j]
    return out_arr


cdef inline Py_ssize_t _find_key(const cnp.int64_t[::1] ukeys, cnp.int64_t key) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = ukeys.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if ukeys[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    if lo < ukeys.shape[0] and ukeys[lo] == key:
        return lo
    return -1


cdef inline double _scan_cell(const double[:, ::1] queries, Py_ssize_t q,
                              const double[:, ::1] spoints, const cnp.int64_t[::1] ukeys,
                              const cnp.int64_t[::1] starts, cnp.int64_t key,
                              Py_ssize_t d, double best) noexcept nogil:
    cdef Py_ssize_t pos = _find_key(ukeys, key)
    cdef Py_ssize_t p, j
    cdef double sq, diff
    if pos < 0:
        return best
    for p in range(starts[pos], starts[pos + 1]):
        sq = 0.0
        for j in range(d):
            diff = queries[q, j] - spoints[p, j]
            sq = sq + diff * diff
        if sq < best:
            best = sq
    return best


def directed_min_sq(const double[:, ::1] queries, const double[:, ::1] spoints,
                    const cnp.int64_t[::1] ukeys, const cnp.int64_t[::1] starts,
                    const cnp.int64_t[::1] clo, const cnp.int64_t[::1] chi,
                    const cnp.int64_t[::1] strides, double h):
    cdef Py_ssize_t nq = queries.shape[0]
    cdef Py_ssize_t d = queries.shape[1]
    best_arr = np.full(nq, np.inf)
    cdef double[::1] best = best_arr
    cdef cnp.int64_t[::1] cq = np.empty(d, dtype=np.int64)
    cdef cnp.int64_t[::1] lo = np.empty(d, dtype=np.int64)
    cdef cnp.int64_t[::1] hi = np.empty(d, dtype=np.int64)
    cdef cnp.int64_t[::1] cur = np.empty(d, dtype=np.int64)
    cdef Py_ssize_t q, j, last = d - 1
    cdef cnp.int64_t rho, rho0, rhomax, a, b, key, base, c
    cdef double v, bound, bsq
    cdef bint on_shell, carry, empty
    with nogil:
        for q in range(nq):
            rho0 = 0
            rhomax = 0
            for j in range(d):
                v = queries[q, j] / h
                if v > 4e18:
                    v = 4e18
                elif v < -4e18:
                    v = -4e18
                cq[j] = <cnp.int64_t> floor(v)
                a = clo[j] - cq[j]
                b = cq[j] - chi[j]
                if a > rho0:
                    rho0 = a
                if b > rho0:
                    rho0 = b
                a = cq[j] - clo[j]
                b = chi[j] - cq[j]
                if a > rhomax:
                    rhomax = a
                if b > rhomax:
                    rhomax = b
            bsq = INFINITY
            rho = rho0
            while True:
                # clipped cube of radius rho; the last axis only visits its shell faces
                # unless an earlier coordinate already sits on the shell
                for j in range(d):
                    lo[j] = cq[j] - rho if cq[j] - rho > clo[j] else clo[j]
                    hi[j] = cq[j] + rho if cq[j] + rho < chi[j] else chi[j]
                empty = False
                for j in range(d):
                    if lo[j] > hi[j]:
                        empty = True
                if not empty:
                    for j in range(last):
                        cur[j] = lo[j]
                    while True:
                        on_shell = False
                        base = 0
                        for j in range(last):
                            if cur[j] - cq[j] == rho or cq[j] - cur[j] == rho:
                                on_shell = True
                            base = base + (cur[j] - clo[j]) * strides[j]
                        if on_shell or rho == 0:
                            for c in range(lo[last], hi[last] + 1):
                                key = base + (c - clo[last]) * strides[last]
                                bsq = _scan_cell(queries, q, spoints, ukeys, starts, key, d, bsq)
                        else:
                            c = cq[last] - rho
                            if c >= lo[last]:
                                key = base + (c - clo[last]) * strides[last]
                                bsq = _scan_cell(queries, q, spoints, ukeys, starts, key, d, bsq)
                            c = cq[last] + rho
                            if c <= hi[last]:
                                key = base + (c - clo[last]) * strides[last]
                                bsq = _scan_cell(queries, q, spoints, ukeys, starts, key, d, bsq)
                        # odometer over the leading axes
                        carry = True
                        j = last - 1
                        while carry and j >= 0:
                            cur[j] += 1
                            if cur[j] > hi[j]:
                                cur[j] = lo[j]
                                j -= 1
                            else:
                                carry = False
                        if carry:
                            break
                if rho >= rhomax:
                    break
                if rho >= 2:
                    bound = (rho - 2) * h
                    if bsq <= bound * bound:
                        break
                rho += 1
            best[q] = bsq
    return best_arr
