"""Sparse linear-algebra kernels expressed as key/value stream intersections.

Every output scalar is one ``S_VINTER ... MAC`` over a pair of sparse
vectors registered with ``S_VREAD``: a CSR row of ``A`` against a CSC column
of ``B`` for SpGEMM, a CSF fiber against the vector for TTV, and a fiber
against a row of the matrix for TTM. Zero results are dropped.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..graph import SparseMatrix, SparseTensor
from ..isa import StreamAPI, TraceEvent

__all__ = ["ShapeError", "KernelResult", "spgemm", "ttv", "ttm", "run_kernel"]


class ShapeError(ValueError):
    """Operand dimensions do not line up."""


@dataclass
class KernelResult:
    kind: str
    output: SparseMatrix | SparseTensor
    vinter_ops: int
    trace: list[TraceEvent] = field(default_factory=list)
    stats: object = None


class _Vectors:
    """Places operand arrays in machine memory once and registers slices as vectors."""

    def __init__(self, api: StreamAPI):
        self.api = api

    def place(self, keys: np.ndarray, values: np.ndarray) -> tuple[int, int]:
        mem = self.api.memory
        k = np.ascontiguousarray(keys, dtype=np.uint32)
        v = np.ascontiguousarray(values, dtype=np.float64)
        if len(k) == 0:
            return 0, 0
        return mem.place(k, "sp_keys"), mem.place(v, "sp_vals")

    def register(self, base: tuple[int, int], start: int, length: int) -> int:
        kaddr, vaddr = base
        if length == 0:
            return self.api.register_vector(0, 0, 0)
        return self.api.register_vector(kaddr + 4 * start, vaddr + 8 * start, length)


def _vector(x) -> tuple[np.ndarray, np.ndarray, int]:
    """Sparse keys/values of a 1-D operand given as a dense array or ``(keys, values, n)``."""
    if isinstance(x, tuple) and len(x) == 3:
        keys, vals, n = x
        return np.asarray(keys, dtype=np.uint32), np.asarray(vals, dtype=np.float64), int(n)
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"expected a vector, got shape {arr.shape}")
    nz = np.flatnonzero(arr)
    return nz.astype(np.uint32), arr[nz], len(arr)


def spgemm(a: SparseMatrix, b: SparseMatrix, *, api: StreamAPI | None = None) -> SparseMatrix:
    return _spgemm(a, b, api).output  # type: ignore[return-value]


def _spgemm(a: SparseMatrix, b: SparseMatrix, api: StreamAPI | None) -> KernelResult:
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    api = api or StreamAPI()
    vec = _Vectors(api)
    a_base = vec.place(a.csr_indices, a.csr_data)
    b_base = vec.place(b.csc_indices, b.csc_data)
    rows, cols, vals = [], [], []
    ops = 0
    for i in range(a.shape[0]):
        lo, hi = int(a.csr_indptr[i]), int(a.csr_indptr[i + 1])
        if lo == hi:
            continue
        # columns j that can be nonzero: union of the patterns of B's rows k in A's row i
        ks = a.csr_indices[lo:hi]
        cand = np.unique(np.concatenate([b.csr_indices[b.csr_indptr[k]:b.csr_indptr[k + 1]] for k in ks]))
        if len(cand) == 0:
            continue
        ra = vec.register(a_base, lo, hi - lo)
        for j in cand.tolist():
            clo, chi = int(b.csc_indptr[j]), int(b.csc_indptr[j + 1])
            cb = vec.register(b_base, clo, chi - clo)
            acc = api.vector_compute(ra, cb, "MAC")
            api.release_vector(cb)
            ops += 1
            if acc != 0.0:
                rows.append(i)
                cols.append(j)
                vals.append(acc)
        api.release_vector(ra)
    out = SparseMatrix.from_coo(a.shape[0], b.shape[1], rows, cols, vals)
    return KernelResult("spgemm", out, ops, api.trace)


def ttv(t: SparseTensor, v, *, api: StreamAPI | None = None) -> SparseMatrix:
    return _ttv(t, v, api).output  # type: ignore[return-value]


def _ttv(t: SparseTensor, v, api: StreamAPI | None) -> KernelResult:
    keys, vals, n = _vector(v)
    if n != t.shape[2]:
        raise ShapeError(f"tensor mode-2 size {t.shape[2]} does not match vector length {n}")
    api = api or StreamAPI()
    vec = _Vectors(api)
    vb = vec.register(vec.place(keys, vals), 0, len(keys))
    t_base = vec.place(t.coords2, t.values)
    rows, cols, out_vals = [], [], []
    ops = 0
    for i, j, start, length in _fiber_slices(t):
        fa = vec.register(t_base, start, length)
        acc = api.vector_compute(fa, vb, "MAC")
        api.release_vector(fa)
        ops += 1
        if acc != 0.0:
            rows.append(i)
            cols.append(j)
            out_vals.append(acc)
    api.release_vector(vb)
    out = SparseMatrix.from_coo(t.shape[0], t.shape[1], rows, cols, out_vals)
    return KernelResult("ttv", out, ops, api.trace)


def ttm(t: SparseTensor, m: SparseMatrix, *, api: StreamAPI | None = None) -> SparseTensor:
    return _ttm(t, m, api).output  # type: ignore[return-value]


def _ttm(t: SparseTensor, m: SparseMatrix, api: StreamAPI | None) -> KernelResult:
    if m.shape[1] != t.shape[2]:
        raise ShapeError(f"tensor mode-2 size {t.shape[2]} does not match matrix columns {m.shape[1]}")
    api = api or StreamAPI()
    vec = _Vectors(api)
    t_base = vec.place(t.coords2, t.values)
    m_base = vec.place(m.csr_indices, m.csr_data)
    nonempty = [k for k in range(m.shape[0]) if m.csr_indptr[k + 1] > m.csr_indptr[k]]
    coords, out_vals = [], []
    ops = 0
    for i, j, start, length in _fiber_slices(t):
        fa = vec.register(t_base, start, length)
        for k in nonempty:
            lo, hi = int(m.csr_indptr[k]), int(m.csr_indptr[k + 1])
            rb = vec.register(m_base, lo, hi - lo)
            acc = api.vector_compute(fa, rb, "MAC")
            api.release_vector(rb)
            ops += 1
            if acc != 0.0:
                coords.append((i, j, k))
                out_vals.append(acc)
        api.release_vector(fa)
    shape = (t.shape[0], t.shape[1], m.shape[0])
    c = np.array(coords, dtype=np.int64).reshape(-1, 3)
    out = SparseTensor.from_coo(shape, c, out_vals)
    return KernelResult("ttm", out, ops, api.trace)


def _fiber_slices(t: SparseTensor):
    """``(i, j, start, length)`` of every mode-2 fiber in CSF order."""
    for a in range(len(t.coords0)):
        i = int(t.coords0[a])
        for b in range(int(t.ptr0[a]), int(t.ptr0[a + 1])):
            j = int(t.coords1[b])
            start, stop = int(t.ptr1[b]), int(t.ptr1[b + 1])
            yield i, j, start, stop - start


def run_kernel(kind: str, a, b, *, timing: bool = False, config=None) -> KernelResult:
    """Run ``spgemm``, ``ttv`` or ``ttm`` and keep the trace (plus timing stats when asked)."""
    fns = {"spgemm": _spgemm, "ttv": _ttv, "ttm": _ttm}
    if kind not in fns:
        raise ValueError(f"unknown kernel {kind!r}; choose from {', '.join(fns)}")
    res = fns[kind](a, b, None)
    if timing:
        from ..timing import SimConfig, simulate

        res.stats = simulate(res.trace, config if config is not None else SimConfig())
    return res
