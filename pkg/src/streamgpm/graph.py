"""Graph, sparse matrix and sparse tensor containers plus their text loaders.

Every container is immutable after construction: the numpy arrays backing it
are flagged read-only so they can be shared freely between executors.
"""
from __future__ import annotations

import io
import math
import os
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

__all__ = [
    "EOS",
    "MAX_VERTEX_ID",
    "GraphFormatError",
    "VertexRangeError",
    "Graph",
    "SparseMatrix",
    "SparseTensor",
    "load_edge_list",
    "parse_edge_list",
    "dump_edge_list",
    "load_labels",
    "bound_offset",
    "from_edges",
    "complete_graph",
    "path_graph",
    "star_graph",
    "cycle_graph",
    "erdos_renyi",
    "load_matrix",
    "dump_matrix",
    "load_tensor",
    "dump_tensor",
    "random_sparse_matrix",
    "random_sparse_tensor",
]

# 2^32 - 1 is reserved as the end-of-stream sentinel, so vertex IDs stop below it.
EOS = 0xFFFF_FFFF
MAX_VERTEX_ID = EOS - 1


class GraphFormatError(ValueError):
    """Malformed input text. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class VertexRangeError(GraphFormatError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph in CSR form.

    ``indptr[v]:indptr[v+1]`` delimits ``N(v)`` inside ``csr_edges``.
    ``csr_bound_offset[v]`` is the index inside ``N(v)`` of the first neighbor
    larger than ``v``, so ``N(v)[:csr_bound_offset[v]]`` are the neighbors below ``v``.
    """

    indptr: np.ndarray
    csr_edges: np.ndarray
    csr_bound_offset: np.ndarray
    labels: np.ndarray | None = None
    original_ids: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "indptr", _frozen(np.asarray(self.indptr, dtype=np.int64)))
        object.__setattr__(self, "csr_edges", _frozen(np.asarray(self.csr_edges, dtype=np.uint32)))
        object.__setattr__(
            self, "csr_bound_offset", _frozen(np.asarray(self.csr_bound_offset, dtype=np.uint32))
        )
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (self.num_vertices,):
                raise ValueError("labels must have one entry per vertex")
            object.__setattr__(self, "labels", _frozen(labels))
        if self.original_ids is not None:
            object.__setattr__(self, "original_ids", _frozen(np.asarray(self.original_ids, dtype=np.int64)))

    @property
    def num_vertices(self) -> int:
        return len(self.indptr) - 1

    @property
    def num_edges(self) -> int:
        """Directed edge slots (twice the undirected edge count)."""
        return len(self.csr_edges)

    @property
    def num_undirected_edges(self) -> int:
        return len(self.csr_edges) // 2

    @property
    def csr_index(self) -> np.ndarray:
        """Per-vertex ``(start, length)`` rows into ``csr_edges`` as uint32."""
        starts = self.indptr[:-1]
        return np.stack([starts, np.diff(self.indptr)], axis=1).astype(np.uint32)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def neighbors(self, v: int) -> np.ndarray:
        self._check_vertex(v)
        return self.csr_edges[self.indptr[v] : self.indptr[v + 1]]

    def lower_neighbors(self, v: int) -> np.ndarray:
        """Neighbors of ``v`` that are smaller than ``v``."""
        self._check_vertex(v)
        start = self.indptr[v]
        return self.csr_edges[start : start + self.csr_bound_offset[v]]

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return int(self.indptr[v + 1] - self.indptr[v])

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        i = int(np.searchsorted(nbrs, v))
        return i < len(nbrs) and int(nbrs[i]) == v

    def edges(self) -> Iterator[tuple[int, int]]:
        """Each undirected edge once, as ``(u, v)`` with ``u < v``."""
        for u in range(self.num_vertices):
            nbrs = self.csr_edges[self.indptr[u] + self.csr_bound_offset[u] : self.indptr[u + 1]]
            for v in nbrs.tolist():
                yield u, v

    def with_labels(self, labels: Mapping[int, int] | np.ndarray, *, by_original_id: bool = True) -> Graph:
        """Attach vertex labels. Mapping keys are original IDs unless ``by_original_id`` is False."""
        if isinstance(labels, Mapping):
            out = np.full(self.num_vertices, -1, dtype=np.int64)
            index = _id_index(self) if by_original_id else None
            for vid, lab in labels.items():
                v = index.get(int(vid)) if index is not None else int(vid)
                if v is None or not 0 <= v < self.num_vertices:
                    raise GraphFormatError(f"label for unknown vertex {vid}")
                out[v] = int(lab)
            if (out < 0).any():
                missing = int(np.flatnonzero(out < 0)[0])
                raise GraphFormatError(f"vertex {self._orig(missing)} has no label")
        else:
            out = np.asarray(labels, dtype=np.int64)
        return Graph(self.indptr, self.csr_edges, self.csr_bound_offset, out, self.original_ids)

    def _orig(self, v: int) -> int:
        return int(self.original_ids[v]) if self.original_ids is not None else v

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.num_vertices:
            raise IndexError(f"vertex {v} out of range [0, {self.num_vertices})")

    def __repr__(self) -> str:
        return f"Graph(n={self.num_vertices}, m={self.num_undirected_edges}, labeled={self.has_labels})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        same = (
            np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.csr_edges, other.csr_edges)
            and np.array_equal(self.csr_bound_offset, other.csr_bound_offset)
        )
        if not same or (self.labels is None) != (other.labels is None):
            return False
        return self.labels is None or np.array_equal(self.labels, other.labels)

    __hash__ = None  # type: ignore[assignment]


def _id_index(g: Graph) -> dict[int, int]:
    if g.original_ids is None:
        return {v: v for v in range(g.num_vertices)}
    return {int(o): i for i, o in enumerate(g.original_ids.tolist())}


def bound_offset(g: Graph, v: int) -> int:
    """Index of the first neighbor of ``v`` larger than ``v``."""
    g._check_vertex(v)
    return int(g.csr_bound_offset[v])


def _build_csr(n: int, src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    keep = src != dst
    src, dst = src[keep], dst[keep]
    both_src = np.concatenate([src, dst])
    both_dst = np.concatenate([dst, src])
    keys = np.unique(both_src * n + both_dst) if n else np.zeros(0, dtype=np.int64)
    rows = keys // n if n else keys
    cols = keys % n if n else keys
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    # first position in each row whose column exceeds the row id
    verts = np.arange(n, dtype=np.int64)
    bound = np.searchsorted(keys, verts * n + verts) - indptr[:-1]
    return indptr, cols.astype(np.uint32), bound.astype(np.uint32)


def from_edges(
    n: int,
    edges: Iterable[tuple[int, int]] | np.ndarray,
    labels: Iterable[int] | None = None,
    *,
    relabel_by_degree: bool = False,
) -> Graph:
    """Build a graph on vertices ``0..n-1``; duplicates, directions and self-loops are normalized."""
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    arr = arr.reshape(-1, 2)
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise IndexError("edge endpoint outside [0, n)")
    lab = None if labels is None else np.asarray(list(labels), dtype=np.int64)
    src, dst = arr[:, 0], arr[:, 1]
    ids = None
    if relabel_by_degree:
        src, dst, lab, ids = _degree_relabel(n, src, dst, lab, np.arange(n))
    indptr, cols, bound = _build_csr(n, src, dst)
    return Graph(indptr, cols, bound, lab, ids)


def _degree_relabel(n, src, dst, labels, ids):
    # undirected degree after dedup, highest degree gets the smallest ID
    indptr, _, _ = _build_csr(n, src, dst)
    deg = np.diff(indptr)
    order = np.lexsort((np.arange(n), -deg))
    new_id = np.empty(n, dtype=np.int64)
    new_id[order] = np.arange(n)
    labels = None if labels is None else labels[order]
    return new_id[src], new_id[dst], labels, ids[order]


def complete_graph(n: int) -> Graph:
    return from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def path_graph(n: int) -> Graph:
    return from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> Graph:
    """Vertex 0 is the center."""
    return from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def erdos_renyi(n: int, p: float, seed: int | None = None, *, num_labels: int | None = None) -> Graph:
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(len(iu)) < p
    labels = rng.integers(0, num_labels, size=n) if num_labels else None
    return from_edges(n, np.stack([iu[mask], ju[mask]], axis=1), labels)


# ---------------------------------------------------------------------------
# edge-list text format
# ---------------------------------------------------------------------------


def _open_text(source: str | os.PathLike | TextIO) -> tuple[TextIO, bool]:
    if hasattr(source, "read"):
        return source, False  # type: ignore[return-value]
    return open(source, encoding="utf-8"), True


def _parse_id(tok: str, lineno: int) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise GraphFormatError(f"expected an integer vertex ID, got {tok!r}", lineno) from None
    if value < 0:
        raise GraphFormatError(f"negative vertex ID {value}", lineno)
    if value > MAX_VERTEX_ID:
        raise VertexRangeError(f"vertex ID {value} collides with the end-of-stream sentinel", lineno)
    return value


def load_edge_list(source: str | os.PathLike | TextIO, *, relabel_by_degree: bool = False) -> Graph:
    """Read a SNAP-style edge list.

    Lines starting with ``#`` or ``%`` are comments. ``label <vertex> <label>``
    lines attach vertex labels. Vertex IDs are compacted to ``0..n-1`` keeping
    their numeric order.
    """
    fh, owned = _open_text(source)
    try:
        src: list[int] = []
        dst: list[int] = []
        labels: dict[int, int] = {}
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line[0] in "#%":
                continue
            toks = line.split()
            if toks[0] == "label":
                if len(toks) != 3:
                    raise GraphFormatError("label lines take a vertex and a label", lineno)
                labels[_parse_id(toks[1], lineno)] = _parse_label(toks[2], lineno)
                continue
            if len(toks) < 2:
                raise GraphFormatError("expected two vertex IDs", lineno)
            src.append(_parse_id(toks[0], lineno))
            dst.append(_parse_id(toks[1], lineno))
    finally:
        if owned:
            fh.close()
    return _assemble(src, dst, labels, relabel_by_degree)


def parse_edge_list(text: str, **kwargs) -> Graph:
    return load_edge_list(io.StringIO(text), **kwargs)


def _parse_label(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise GraphFormatError(f"expected an integer label, got {tok!r}", lineno) from None


def _assemble(src: list[int], dst: list[int], labels: dict[int, int], relabel: bool) -> Graph:
    s = np.asarray(src, dtype=np.int64)
    d = np.asarray(dst, dtype=np.int64)
    ids = np.unique(np.concatenate([s, d, np.asarray(list(labels), dtype=np.int64)]))
    n = len(ids)
    cs = np.searchsorted(ids, s)
    cd = np.searchsorted(ids, d)
    lab = None
    if labels:
        missing = [int(v) for v in ids if int(v) not in labels]
        if missing:
            raise GraphFormatError(f"vertex {missing[0]} has no label while others do")
        lab = np.asarray([labels[int(v)] for v in ids], dtype=np.int64)
    if relabel:
        cs, cd, lab, ids = _degree_relabel(n, cs, cd, lab, ids)
    indptr, cols, bound = _build_csr(n, cs, cd)
    return Graph(indptr, cols, bound, lab, ids)


def load_labels(source: str | os.PathLike | TextIO) -> dict[int, int]:
    """Read a label sidecar: ``<vertex> <label>`` or ``label <vertex> <label>`` per line."""
    fh, owned = _open_text(source)
    out: dict[int, int] = {}
    try:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line[0] in "#%":
                continue
            toks = line.split()
            if toks[0] == "label":
                toks = toks[1:]
            if len(toks) != 2:
                raise GraphFormatError("expected '<vertex> <label>'", lineno)
            out[_parse_id(toks[0], lineno)] = _parse_label(toks[1], lineno)
    finally:
        if owned:
            fh.close()
    return out


def dump_edge_list(g: Graph) -> str:
    """Inverse of :func:`load_edge_list`; isolated vertices are written as self-loops."""
    ids = g.original_ids if g.original_ids is not None else np.arange(g.num_vertices)
    out = io.StringIO()
    for u, v in g.edges():
        out.write(f"{ids[u]} {ids[v]}\n")
    for v in np.flatnonzero(g.degrees == 0).tolist():
        out.write(f"{ids[v]} {ids[v]}\n")
    if g.labels is not None:
        for v, lab in enumerate(g.labels.tolist()):
            out.write(f"label {ids[v]} {lab}\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# Sparse matrix
# ---------------------------------------------------------------------------


def _compress(major: np.ndarray, minor: np.ndarray, vals: np.ndarray, n_major: int):
    order = np.lexsort((minor, major))
    major, minor, vals = major[order], minor[order], vals[order]
    indptr = np.zeros(n_major + 1, dtype=np.int64)
    np.cumsum(np.bincount(major, minlength=n_major), out=indptr[1:])
    return _frozen(indptr), _frozen(minor.astype(np.uint32)), _frozen(vals.astype(np.float64))


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Matrix kept simultaneously in CSR and CSC with sorted 32-bit keys per line."""

    rows: int
    cols: int
    csr_indptr: np.ndarray
    csr_indices: np.ndarray
    csr_data: np.ndarray
    csc_indptr: np.ndarray
    csc_indices: np.ndarray
    csc_data: np.ndarray

    @classmethod
    def from_coo(cls, rows: int, cols: int, r, c, v) -> SparseMatrix:
        r = np.asarray(r, dtype=np.int64).ravel()
        c = np.asarray(c, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.float64).ravel()
        if not (len(r) == len(c) == len(v)):
            raise ValueError("coordinate arrays differ in length")
        if len(r) and (r.min() < 0 or r.max() >= rows or c.min() < 0 or c.max() >= cols):
            raise IndexError("coordinate outside matrix shape")
        if not np.isfinite(v).all():
            raise ValueError("non-finite matrix value")
        keys = r * max(cols, 1) + c
        if len(np.unique(keys)) != len(keys):
            raise ValueError("duplicate coordinate")
        csr = _compress(r, c, v, rows)
        csc = _compress(c, r, v, cols)
        return cls(rows, cols, *csr, *csc)

    @classmethod
    def from_dense(cls, dense) -> SparseMatrix:
        d = np.asarray(dense, dtype=np.float64)
        r, c = np.nonzero(d)
        return cls.from_coo(d.shape[0], d.shape[1], r, c, d[r, c])

    @property
    def nnz(self) -> int:
        return len(self.csr_data)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.csr_indptr[i], self.csr_indptr[i + 1]
        return self.csr_indices[lo:hi], self.csr_data[lo:hi]

    def col(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.csc_indptr[j], self.csc_indptr[j + 1]
        return self.csc_indices[lo:hi], self.csc_data[lo:hi]

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols))
        for i in range(self.rows):
            k, v = self.row(i)
            out[i, k.astype(np.int64)] = v
        return out

    def coo(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        r = np.repeat(np.arange(self.rows), np.diff(self.csr_indptr))
        return r, self.csr_indices.astype(np.int64), self.csr_data

    def __repr__(self) -> str:
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


def load_matrix(source: str | os.PathLike | TextIO) -> SparseMatrix:
    """Read a MatrixMarket ``coordinate`` file (real, integer or pattern; general or symmetric)."""
    fh, owned = _open_text(source)
    try:
        lines = list(enumerate(fh, start=1))
    finally:
        if owned:
            fh.close()
    if not lines or not lines[0][1].lower().startswith("%%matrixmarket"):
        raise GraphFormatError("missing %%MatrixMarket header", 1)
    header = lines[0][1].lower().split()
    if len(header) < 5 or header[1] != "matrix" or header[2] != "coordinate":
        raise GraphFormatError("only 'matrix coordinate' files are supported", 1)
    field_, symmetry = header[3], header[4]
    if field_ not in ("real", "integer", "pattern") or symmetry not in ("general", "symmetric"):
        raise GraphFormatError(f"unsupported MatrixMarket flavor {field_}/{symmetry}", 1)
    body = [(n, ln.split()) for n, ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise GraphFormatError("missing size line")
    size_line, size = body[0]
    try:
        rows, cols, nnz = (int(t) for t in size)
    except ValueError:
        raise GraphFormatError("bad size line", size_line) from None
    r, c, v = [], [], []
    for lineno, toks in body[1:]:
        want = 2 if field_ == "pattern" else 3
        if len(toks) != want:
            raise GraphFormatError(f"expected {want} fields", lineno)
        try:
            i, j = int(toks[0]) - 1, int(toks[1]) - 1
            val = 1.0 if field_ == "pattern" else float(toks[2])
        except ValueError:
            raise GraphFormatError("malformed entry", lineno) from None
        if not math.isfinite(val):
            raise ValueError(f"line {lineno}: non-finite matrix value")
        r.append(i)
        c.append(j)
        v.append(val)
        if symmetry == "symmetric" and i != j:
            r.append(j)
            c.append(i)
            v.append(val)
    if len(body) - 1 != nnz:
        raise GraphFormatError(f"header announces {nnz} entries, found {len(body) - 1}")
    return SparseMatrix.from_coo(rows, cols, r, c, v)


def dump_matrix(m: SparseMatrix) -> str:
    out = io.StringIO()
    out.write("%%MatrixMarket matrix coordinate real general\n")
    out.write(f"{m.rows} {m.cols} {m.nnz}\n")
    r, c, v = m.coo()
    for i, j, x in zip(r.tolist(), c.tolist(), v.tolist()):
        out.write(f"{i + 1} {j + 1} {x!r}\n")
    return out.getvalue()


def random_sparse_matrix(rows: int, cols: int, density: float, seed: int | None = None) -> SparseMatrix:
    rng = np.random.default_rng(seed)
    mask = rng.random((rows, cols)) < density
    r, c = np.nonzero(mask)
    return SparseMatrix.from_coo(rows, cols, r, c, rng.uniform(-1.0, 1.0, size=len(r)))


# ---------------------------------------------------------------------------
# Sparse tensor (order 3, CSF)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SparseTensor:
    """Order-3 tensor in compressed sparse fiber layout.

    Level 0 holds distinct ``i`` coordinates; ``ptr0`` delimits their ``j``
    children in level 1; ``ptr1`` delimits each ``(i, j)`` fiber of ``k``
    coordinates and values in level 2.
    """

    shape: tuple[int, int, int]
    coords0: np.ndarray
    ptr0: np.ndarray
    coords1: np.ndarray
    ptr1: np.ndarray
    coords2: np.ndarray
    values: np.ndarray

    @classmethod
    def from_coo(cls, shape, coords, values) -> SparseTensor:
        shape = tuple(int(s) for s in shape)
        if len(shape) != 3:
            raise ValueError("only order-3 tensors are supported")
        coords = np.asarray(coords, dtype=np.int64).reshape(-1, 3)
        values = np.asarray(values, dtype=np.float64).ravel()
        if len(coords) != len(values):
            raise ValueError("coordinate and value counts differ")
        if len(coords) and ((coords < 0).any() or (coords >= np.asarray(shape)).any()):
            raise IndexError("coordinate outside tensor shape")
        if not np.isfinite(values).all():
            raise ValueError("non-finite tensor value")
        i, j, k = coords[:, 0], coords[:, 1], coords[:, 2]
        order = np.lexsort((k, j, i))
        i, j, k, values = i[order], j[order], k[order], values[order]
        flat = (i * shape[1] + j) * shape[2] + k
        if len(flat) and (np.diff(flat) == 0).any():
            raise ValueError("duplicate coordinate")
        ij = i * shape[1] + j
        fiber_start = np.flatnonzero(np.r_[True, np.diff(ij) != 0]) if len(ij) else np.zeros(0, np.int64)
        fib_i = i[fiber_start]
        fib_j = j[fiber_start]
        slice_start = np.flatnonzero(np.r_[True, np.diff(fib_i) != 0]) if len(fib_i) else np.zeros(0, np.int64)
        coords0 = fib_i[slice_start]
        ptr0 = np.r_[slice_start, len(fib_i)]
        ptr1 = np.r_[fiber_start, len(k)]
        return cls(
            shape,
            _frozen(coords0.astype(np.uint32)),
            _frozen(ptr0.astype(np.int64)),
            _frozen(fib_j.astype(np.uint32)),
            _frozen(ptr1.astype(np.int64)),
            _frozen(k.astype(np.uint32)),
            _frozen(values),
        )

    @classmethod
    def from_dense(cls, dense) -> SparseTensor:
        d = np.asarray(dense, dtype=np.float64)
        idx = np.argwhere(d != 0)
        return cls.from_coo(d.shape, idx, d[tuple(idx.T)])

    @property
    def nnz(self) -> int:
        return len(self.values)

    def fibers(self) -> Iterator[tuple[int, int, np.ndarray, np.ndarray]]:
        """Yield ``(i, j, k_keys, values)`` for every nonempty mode-2 fiber."""
        for s, i in enumerate(self.coords0.tolist()):
            for f in range(self.ptr0[s], self.ptr0[s + 1]):
                lo, hi = self.ptr1[f], self.ptr1[f + 1]
                yield i, int(self.coords1[f]), self.coords2[lo:hi], self.values[lo:hi]

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for i, j, k, v in self.fibers():
            out[i, j, k.astype(np.int64)] = v
        return out

    def coo(self) -> tuple[np.ndarray, np.ndarray]:
        rows = []
        for i, j, k, _ in self.fibers():
            for kk in k.tolist():
                rows.append((i, j, kk))
        return np.asarray(rows, dtype=np.int64).reshape(-1, 3), self.values

    def __repr__(self) -> str:
        return f"SparseTensor(shape={self.shape}, nnz={self.nnz})"


def load_tensor(source: str | os.PathLike | TextIO, shape: tuple[int, int, int] | None = None) -> SparseTensor:
    """Read a FROSTT ``.tns`` file: 1-indexed ``i j k value`` per line."""
    fh, owned = _open_text(source)
    coords, vals = [], []
    try:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line[0] in "#%":
                continue
            toks = line.split()
            if len(toks) != 4:
                raise GraphFormatError("expected three coordinates and a value", lineno)
            try:
                idx = [int(t) - 1 for t in toks[:3]]
                val = float(toks[3])
            except ValueError:
                raise GraphFormatError("malformed entry", lineno) from None
            if min(idx) < 0:
                raise GraphFormatError("coordinates are 1-indexed", lineno)
            if not math.isfinite(val):
                raise ValueError(f"line {lineno}: non-finite tensor value")
            coords.append(idx)
            vals.append(val)
    finally:
        if owned:
            fh.close()
    arr = np.asarray(coords, dtype=np.int64).reshape(-1, 3)
    if shape is None:
        shape = tuple(int(x) + 1 for x in arr.max(axis=0)) if len(arr) else (0, 0, 0)
    return SparseTensor.from_coo(shape, arr, vals)


def dump_tensor(t: SparseTensor) -> str:
    out = io.StringIO()
    coords, vals = t.coo()
    for (i, j, k), v in zip(coords.tolist(), vals.tolist()):
        out.write(f"{i + 1} {j + 1} {k + 1} {v!r}\n")
    return out.getvalue()


def random_sparse_tensor(shape, density: float, seed: int | None = None) -> SparseTensor:
    rng = np.random.default_rng(seed)
    mask = rng.random(shape) < density
    idx = np.argwhere(mask)
    return SparseTensor.from_coo(shape, idx, rng.uniform(-1.0, 1.0, size=len(idx)))
