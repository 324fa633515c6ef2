"""Pure-Python merge kernels.

Exact mirror of ``_ckernels.pyx``: every function returns the same tuple
layout and the same step counts, so the backends are interchangeable.
``limit`` is an exclusive upper bound; unbounded callers pass ``1 << 32``.
"""
from __future__ import annotations

import numpy as np

OP_MAC = 0
OP_MAX = 1
OP_MIN = 2

_EMPTY = np.zeros(0, dtype=np.uint32)


def _out(keys: list[int]) -> np.ndarray:
    return np.asarray(keys, dtype=np.uint32) if keys else _EMPTY.copy()


def intersect(a, b, limit: int, want_out: bool):
    """Returns ``(out_or_None, count, comparisons, read_a, read_b)``."""
    la = a.tolist() if hasattr(a, "tolist") else list(a)
    lb = b.tolist() if hasattr(b, "tolist") else list(b)
    na, nb = len(la), len(lb)
    i = j = comps = count = 0
    ra = rb = 0
    out = [] if want_out else None
    while i < na and j < nb:
        x = la[i]
        y = lb[j]
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
            count += 1
            if out is not None:
                out.append(x)
            i += 1
            j += 1
    return (_out(out) if out is not None else None), count, comps, ra, rb


def subtract(a, b, limit: int, want_out: bool):
    """Keys of ``a`` absent from ``b`` and below ``limit``; same tuple as :func:`intersect`."""
    la = a.tolist() if hasattr(a, "tolist") else list(a)
    lb = b.tolist() if hasattr(b, "tolist") else list(b)
    na, nb = len(la), len(lb)
    i = j = comps = count = 0
    ra = rb = 0
    out = [] if want_out else None
    while i < na:
        x = la[i]
        comps += 1
        ra = i + 1
        if x >= limit:
            break
        if j < nb:
            y = lb[j]
            if j >= rb:
                rb = j + 1
            if y < x:
                j += 1
                continue
            if y == x:
                i += 1
                j += 1
                continue
        count += 1
        if out is not None:
            out.append(x)
        i += 1
    return (_out(out) if out is not None else None), count, comps, ra, rb


def vinter(ak, av, bk, bv, op: int):
    """Returns ``(acc, matched, comparisons, read_a, read_b, idx_a, idx_b)``."""
    la = ak.tolist() if hasattr(ak, "tolist") else list(ak)
    lb = bk.tolist() if hasattr(bk, "tolist") else list(bk)
    va = av.tolist() if hasattr(av, "tolist") else list(av)
    vb = bv.tolist() if hasattr(bv, "tolist") else list(bv)
    na, nb = len(la), len(lb)
    i = j = comps = 0
    ra = rb = 0
    acc = 0.0
    ia: list[int] = []
    ib: list[int] = []
    while i < na and j < nb:
        x = la[i]
        y = lb[j]
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
            p, q = va[i], vb[j]
            if op == OP_MAC:
                acc += p * q
            elif op == OP_MAX:
                acc += p if p >= q else q
            else:
                acc += p if p <= q else q
            ia.append(i)
            ib.append(j)
            i += 1
            j += 1
    return (
        acc,
        len(ia),
        comps,
        ra,
        rb,
        np.asarray(ia, dtype=np.int64),
        np.asarray(ib, dtype=np.int64),
    )


def nested(s, indptr, edges, boff):
    """Sum over ``s_i`` of ``|s ∩ N(s_i)[:boff[s_i]]|`` bounded by ``s_i``.

    Returns ``(total, counts, prefix_lens, comparisons, read_s, read_prefix)``;
    all but the total are per-element int64 arrays describing the expansion.
    """
    ls = s.tolist() if hasattr(s, "tolist") else list(s)
    n = len(indptr) - 1
    counts = np.zeros(len(ls), dtype=np.int64)
    lens = np.zeros(len(ls), dtype=np.int64)
    comps = np.zeros(len(ls), dtype=np.int64)
    reads_s = np.zeros(len(ls), dtype=np.int64)
    reads_p = np.zeros(len(ls), dtype=np.int64)
    total = 0
    for e, v in enumerate(ls):
        if v >= n:
            raise IndexError(f"stream key {v} is not a vertex (n={n})")
        start = int(indptr[v])
        plen = int(boff[v])
        prefix = edges[start : start + plen]
        _, c, k, ra, rb = intersect(ls, prefix, v, False)
        counts[e] = c
        reads_s[e] = ra
        reads_p[e] = rb
        lens[e] = plen
        comps[e] = k
        total += c
    return total, counts, lens, comps, reads_s, reads_p
