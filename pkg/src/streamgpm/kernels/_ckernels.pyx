# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled merge kernels; same contract as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint32_t, int64_t

cnp.import_array()

OP_MAC = 0
OP_MAX = 1
OP_MIN = 2


cdef inline object _as_u32(object x):
    return np.ascontiguousarray(x, dtype=np.uint32)


cdef tuple _intersect(const uint32_t[::1] a, const uint32_t[::1] b, int64_t limit, bint want_out):
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    cdef Py_ssize_t i = 0, j = 0, ra = 0, rb = 0, count = 0, comps = 0
    cdef int64_t x, y
    cdef cnp.ndarray[cnp.uint32_t, ndim=1] out
    cdef uint32_t[::1] ov
    if want_out:
        out = np.empty(min(na, nb), dtype=np.uint32)
        ov = out
    while i < na and j < nb:
        x = a[i]
        y = b[j]
        comps += 1
        if i >= ra:
            ra = i + 1
        if j >= rb:
            rb = j + 1
        if x >= limit or y >= limit:
            break
        if x < y:
            i += 1
        elif y < x:
            j += 1
        else:
            if want_out:
                ov[count] = <uint32_t>x
            count += 1
            i += 1
            j += 1
    if want_out:
        return out[:count].copy(), count, comps, ra, rb
    return None, count, comps, ra, rb


cdef tuple _subtract(const uint32_t[::1] a, const uint32_t[::1] b, int64_t limit, bint want_out):
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    cdef Py_ssize_t i = 0, j = 0, ra = 0, rb = 0, count = 0, comps = 0
    cdef int64_t x, y
    cdef cnp.ndarray[cnp.uint32_t, ndim=1] out
    cdef uint32_t[::1] ov
    if want_out:
        out = np.empty(na, dtype=np.uint32)
        ov = out
    while i < na:
        x = a[i]
        comps += 1
        ra = i + 1
        if x >= limit:
            break
        if j < nb:
            y = b[j]
            if j >= rb:
                rb = j + 1
            if y < x:
                j += 1
                continue
            if y == x:
                i += 1
                j += 1
                continue
        if want_out:
            ov[count] = <uint32_t>x
        count += 1
        i += 1
    if want_out:
        return out[:count].copy(), count, comps, ra, rb
    return None, count, comps, ra, rb


def intersect(a, b, int64_t limit, bint want_out):
    return _intersect(_as_u32(a), _as_u32(b), limit, want_out)


def subtract(a, b, int64_t limit, bint want_out):
    return _subtract(_as_u32(a), _as_u32(b), limit, want_out)


def vinter(ak, av, bk, bv, int op):
    cdef const uint32_t[::1] ka = _as_u32(ak)
    cdef const uint32_t[::1] kb = _as_u32(bk)
    cdef const double[::1] va = np.ascontiguousarray(av, dtype=np.float64)
    cdef const double[::1] vb = np.ascontiguousarray(bv, dtype=np.float64)
    cdef Py_ssize_t na = ka.shape[0], nb = kb.shape[0]
    cdef Py_ssize_t i = 0, j = 0, ra = 0, rb = 0, m = 0, comps = 0
    cdef uint32_t x, y
    cdef double acc = 0.0, p, q
    ia = np.empty(min(na, nb), dtype=np.int64)
    ib = np.empty(min(na, nb), dtype=np.int64)
    cdef int64_t[::1] iav = ia
    cdef int64_t[::1] ibv = ib
    while i < na and j < nb:
        x = ka[i]
        y = kb[j]
        comps += 1
        if i >= ra:
            ra = i + 1
        if j >= rb:
            rb = j + 1
        if x < y:
            i += 1
        elif y < x:
            j += 1
        else:
            p = va[i]
            q = vb[j]
            if op == 0:
                acc += p * q
            elif op == 1:
                acc += p if p >= q else q
            else:
                acc += p if p <= q else q
            iav[m] = i
            ibv[m] = j
            m += 1
            i += 1
            j += 1
    return acc, m, comps, ra, rb, ia[:m].copy(), ib[:m].copy()


def nested(s, indptr, edges, boff):
    cdef const uint32_t[::1] sv = _as_u32(s)
    cdef const int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const uint32_t[::1] ev = _as_u32(edges)
    cdef const uint32_t[::1] bo = _as_u32(boff)
    cdef Py_ssize_t ns = sv.shape[0], n = ip.shape[0] - 1
    counts = np.zeros(ns, dtype=np.int64)
    lens = np.zeros(ns, dtype=np.int64)
    comps = np.zeros(ns, dtype=np.int64)
    reads_s = np.zeros(ns, dtype=np.int64)
    reads_p = np.zeros(ns, dtype=np.int64)
    cdef int64_t[::1] rsv = reads_s
    cdef int64_t[::1] rpv = reads_p
    cdef int64_t[::1] cv = counts
    cdef int64_t[::1] lv = lens
    cdef int64_t[::1] kv = comps
    cdef Py_ssize_t e, i, j, start, plen, c, k, ra, rb
    cdef int64_t total = 0, lim, x, y
    for e in range(ns):
        lim = sv[e]
        if lim >= n:
            raise IndexError(f"stream key {lim} is not a vertex (n={n})")
        start = ip[lim]
        plen = bo[lim]
        i = 0
        j = 0
        c = 0
        k = 0
        ra = 0
        rb = 0
        while i < ns and j < plen:
            x = sv[i]
            y = ev[start + j]
            k += 1
            if i >= ra:
                ra = i + 1
            if j >= rb:
                rb = j + 1
            if x >= lim or y >= lim:
                break
            if x < y:
                i += 1
            elif y < x:
                j += 1
            else:
                c += 1
                i += 1
                j += 1
        cv[e] = c
        lv[e] = plen
        kv[e] = k
        rsv[e] = ra
        rpv[e] = rb
        total += c
    return total, counts, lens, comps, reads_s, reads_p
