"""Functional semantics of every stream computation.

The merge loops live in a compiled extension (``_ckernels``) when it has been
built; otherwise the pure-Python ``_pykernels`` is used. Set
``STREAMGPM_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from ..graph import EOS, Graph

if os.environ.get("STREAMGPM_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:  # extension not built
        from . import _pykernels as _impl  # type: ignore[no-redef]

BACKEND: str = "cython" if _impl.__name__.endswith("_ckernels") else "python"

__all__ = [
    "BACKEND",
    "EOS",
    "UNBOUNDED",
    "ReduceOp",
    "MergeStats",
    "VinterResult",
    "NestedResult",
    "as_keys",
    "limit_of",
    "intersect",
    "subtract",
    "intersect_count",
    "subtract_count",
    "intersect_stats",
    "subtract_stats",
    "nested_intersect_count",
    "nested_stats",
    "nested_from_arrays",
    "vinter",
    "vinter_stats",
    "fetch",
]

# Exclusive limit that admits every 32-bit key; the ISA encodes it as bound -1.
UNBOUNDED = 1 << 32


class ReduceOp(IntEnum):
    MAC = 0
    MAX = 1
    MIN = 2


@dataclass(frozen=True)
class MergeStats:
    out: np.ndarray | None
    count: int
    comparisons: int
    read_a: int
    read_b: int


@dataclass(frozen=True)
class VinterResult:
    value: float
    matched: int
    comparisons: int
    read_a: int
    read_b: int
    idx_a: np.ndarray
    idx_b: np.ndarray


@dataclass(frozen=True)
class NestedResult:
    total: int
    counts: np.ndarray
    prefix_lengths: np.ndarray
    comparisons: np.ndarray
    reads_s: np.ndarray
    reads_prefix: np.ndarray


def as_keys(xs: Iterable[int] | np.ndarray) -> np.ndarray:
    """Coerce to a contiguous uint32 key array (no validation)."""
    if isinstance(xs, np.ndarray) and xs.dtype == np.uint32 and xs.flags.c_contiguous:
        return xs
    return np.ascontiguousarray(np.fromiter(xs, dtype=np.int64) if not isinstance(xs, np.ndarray) else xs,
                                dtype=np.uint32)


def limit_of(bound: int | None) -> int:
    """Map a bound (``None`` or a negative value meaning unbounded) to an exclusive limit."""
    if bound is None or bound < 0:
        return UNBOUNDED
    return int(bound)


def intersect_stats(a, b, bound: int | None = None, *, want_out: bool = True) -> MergeStats:
    return MergeStats(*_impl.intersect(as_keys(a), as_keys(b), limit_of(bound), want_out))


def subtract_stats(a, b, bound: int | None = None, *, want_out: bool = True) -> MergeStats:
    return MergeStats(*_impl.subtract(as_keys(a), as_keys(b), limit_of(bound), want_out))


def intersect(a, b, bound: int | None = None) -> np.ndarray:
    """Keys present in both ``a`` and ``b`` that are below ``bound``."""
    return _impl.intersect(as_keys(a), as_keys(b), limit_of(bound), True)[0]


def subtract(a, b, bound: int | None = None) -> np.ndarray:
    """Keys of ``a`` not in ``b`` that are below ``bound``."""
    return _impl.subtract(as_keys(a), as_keys(b), limit_of(bound), True)[0]


def intersect_count(a, b, bound: int | None = None) -> int:
    return int(_impl.intersect(as_keys(a), as_keys(b), limit_of(bound), False)[1])


def subtract_count(a, b, bound: int | None = None) -> int:
    return int(_impl.subtract(as_keys(a), as_keys(b), limit_of(bound), False)[1])


def nested_stats(s, g: Graph) -> NestedResult:
    return nested_from_arrays(as_keys(s), g.indptr, g.csr_edges, g.csr_bound_offset)


def nested_from_arrays(s, indptr, edges, boff) -> NestedResult:
    total, counts, lens, comps, rs, rp = _impl.nested(s, indptr, edges, boff)
    return NestedResult(int(total), counts, lens, comps, rs, rp)


def nested_intersect_count(s, g: Graph) -> int:
    """Sum over ``s_i`` in ``s`` of ``|s ∩ N(s_i)|`` restricted to keys below ``s_i``."""
    return nested_stats(s, g).total


def vinter_stats(a_keys, a_vals, b_keys, b_vals, op: ReduceOp | int = ReduceOp.MAC) -> VinterResult:
    ka, kb = as_keys(a_keys), as_keys(b_keys)
    va = np.ascontiguousarray(a_vals, dtype=np.float64)
    vb = np.ascontiguousarray(b_vals, dtype=np.float64)
    if len(ka) != len(va) or len(kb) != len(vb):
        raise ValueError("key and value arrays differ in length")
    acc, m, comps, ra, rb, ia, ib = _impl.vinter(ka, va, kb, vb, int(ReduceOp(op)))
    return VinterResult(float(acc), int(m), int(comps), int(ra), int(rb), ia, ib)


def vinter(a: Sequence[tuple[int, float]] | tuple, b: Sequence[tuple[int, float]] | tuple,
           op: ReduceOp | int | str = ReduceOp.MAC) -> float:
    """Reduce value pairs at matching keys.

    ``a`` and ``b`` are either sequences of ``(key, value)`` pairs or
    ``(keys, values)`` array tuples. MAX and MIN add up the per-key max/min.
    """
    if isinstance(op, str):
        op = ReduceOp[op.upper()]
    ka, va = _split_kv(a)
    kb, vb = _split_kv(b)
    return vinter_stats(ka, va, kb, vb, op).value


def _split_kv(s) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(s, tuple) and len(s) == 2 and isinstance(s[0], np.ndarray):
        return as_keys(s[0]), np.asarray(s[1], dtype=np.float64)
    pairs = list(s)
    if not pairs:
        return np.zeros(0, np.uint32), np.zeros(0)
    keys, vals = zip(*pairs)
    return as_keys(keys), np.asarray(vals, dtype=np.float64)


def fetch(s, offset: int) -> int:
    """Element ``offset`` of ``s``, or the EOS sentinel past the end."""
    if offset < 0:
        raise ValueError("offset must be non-negative")
    return int(s[offset]) if offset < len(s) else EOS
