"""Brute-force references used only for validation.

Nothing here touches the compiler, the ISA or the merge kernels: embeddings
are found by growing connected vertex subsets and checking every
pattern-vertex permutation against the induced subgraph, and FSM supports
come from enumerating every connected edge subset of up to three edges.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .compiler.pattern import Pattern
from .graph import Graph, SparseMatrix, SparseTensor

__all__ = [
    "ORACLE_MAX_VERTICES",
    "OracleSizeError",
    "OracleResult",
    "oracle_count",
    "oracle_embeddings",
    "canonical_labeled",
    "oracle_fsm",
    "dense_reference",
]

ORACLE_MAX_VERTICES = 2000
_DENSE_LIMIT = 50_000_000  # elements


class OracleSizeError(ValueError):
    pass


@dataclass
class OracleResult:
    count: int
    embeddings: list[frozenset[tuple[int, int]]] | None = None


def _check_size(g: Graph, limit: int) -> None:
    if g.num_vertices > limit:
        raise OracleSizeError(
            f"graph has {g.num_vertices} vertices; the exhaustive oracle is capped at {limit}. "
            "Use a smaller graph or raise the cap explicitly via max_vertices."
        )


def _pattern_adj(p: Pattern) -> list[list[bool]]:
    return [[p.adjacent(u, v) for v in range(p.k)] for u in range(p.k)]


def _aut_size(adj: list[list[bool]], labels) -> int:
    k = len(adj)
    n = 0
    for perm in itertools.permutations(range(k)):
        if labels is not None and any(labels[perm[u]] != labels[u] for u in range(k)):
            continue
        if all(adj[perm[u]][perm[v]] == adj[u][v] for u in range(k) for v in range(u + 1, k)):
            n += 1
    return n


class _Matcher:
    """Counts pattern bijections onto a vertex set, memoized by the induced-edge bitmask."""

    def __init__(self, p: Pattern):
        self.k = p.k
        self.vertex_mode = p.mode == "vertex"
        self.adj = _pattern_adj(p)
        self.labels = p.labels
        self.aut = _aut_size(self.adj, self.labels)
        self._full: dict[tuple, int] = {}
        self._partial: dict[tuple, bool] = {}
        self._perms = {m: list(itertools.permutations(range(self.k), m)) for m in range(1, self.k + 1)}

    def _fits(self, gadj, glab, image) -> bool:
        # image[i] = pattern vertex assigned to the i-th subset vertex
        m = len(image)
        if self.labels is not None and any(self.labels[image[i]] != glab[i] for i in range(m)):
            return False
        for i in range(m):
            for j in range(i + 1, m):
                pe = self.adj[image[i]][image[j]]
                if pe and not gadj[i][j]:
                    return False
                if self.vertex_mode and gadj[i][j] and not pe:
                    return False
        return True

    def extendable(self, key, gadj, glab) -> bool:
        hit = self._partial.get(key)
        if hit is None:
            hit = any(self._fits(gadj, glab, img) for img in self._perms[len(gadj)])
            self._partial[key] = hit
        return hit

    def maps(self, key, gadj, glab) -> int:
        hit = self._full.get(key)
        if hit is None:
            hit = sum(1 for img in self._perms[self.k] if self._fits(gadj, glab, img))
            self._full[key] = hit
        return hit


def _subset_key(vs, nbr, lab):
    m = len(vs)
    gadj = [[False] * m for _ in range(m)]
    bits = 0
    bit = 0
    for i in range(m):
        for j in range(i + 1, m):
            if vs[j] in nbr[vs[i]]:
                gadj[i][j] = gadj[j][i] = True
                bits |= 1 << bit
            bit += 1
    glab = tuple(lab[v] for v in vs) if lab is not None else None
    return (m, bits, glab), gadj, glab


def _connected_subsets(g: Graph, k: int, keep):
    """Enumerate connected k-vertex subsets (ESU), pruning subsets rejected by ``keep``."""
    nbr = [frozenset(g.neighbors(v).tolist()) for v in range(g.num_vertices)]

    def extend(sub: list[int], ext: set[int], root: int, excl: set[int]):
        if len(sub) == k:
            yield sub
            return
        ext = set(ext)
        while ext:
            w = ext.pop()
            new_sub = sub + [w]
            if not keep(new_sub):
                continue
            new_excl = excl | nbr[w] | {w}
            new_ext = ext | {u for u in nbr[w] if u > root and u not in excl and u not in sub}
            yield from extend(new_sub, new_ext, root, new_excl)

    for v in range(g.num_vertices):
        if not keep([v]):
            continue
        yield from extend([v], {u for u in nbr[v] if u > v}, v, set(nbr[v]) | {v})


def oracle_embeddings(g: Graph, p: Pattern, *, max_vertices: int = ORACLE_MAX_VERTICES,
                      materialize: bool = False) -> OracleResult:
    _check_size(g, max_vertices)
    if p.labels is not None and g.labels is None:
        raise ValueError("labeled pattern needs a labeled graph")
    nbr = [frozenset(g.neighbors(v).tolist()) for v in range(g.num_vertices)]
    lab = g.labels.tolist() if (g.labels is not None and p.labels is not None) else None
    m = _Matcher(p)

    def keep(sub):
        vs = sorted(sub)
        key, gadj, glab = _subset_key(vs, nbr, lab)
        return m.extendable(key, gadj, glab)

    total = 0
    found: list[frozenset[tuple[int, int]]] | None = [] if materialize else None
    for sub in _connected_subsets(g, p.k, keep):
        vs = sorted(sub)
        key, gadj, glab = _subset_key(vs, nbr, lab)
        maps = m.maps(key, gadj, glab)
        if not maps:
            continue
        total += maps
        if found is not None:
            seen = set()
            for img in itertools.permutations(range(p.k)):
                if m._fits(gadj, glab, img):
                    inv = {img[i]: vs[i] for i in range(p.k)}
                    es = frozenset(
                        (min(inv[a], inv[b]), max(inv[a], inv[b])) for a, b in p.edges
                    )
                    es = es | frozenset((v, v) for v in vs)  # keep the vertex set in the identity
                    seen.add(es)
            found.extend(sorted(seen, key=sorted))
    assert total % m.aut == 0
    return OracleResult(total // m.aut, found)


def oracle_count(g: Graph, p: Pattern, mode: str | None = None, *,
                 max_vertices: int = ORACLE_MAX_VERTICES) -> int:
    """Number of distinct embeddings of ``p`` in ``g`` (``mode`` overrides the pattern's)."""
    if mode is not None and mode != p.mode:
        p = p.with_mode(mode)
    return oracle_embeddings(g, p, max_vertices=max_vertices).count


# ---------------------------------------------------------------------------
# frequent subgraph mining
# ---------------------------------------------------------------------------


def canonical_labeled(k: int, edges, labels) -> tuple:
    """Canonical key ``(k, labels, edges)``: lexicographic minimum over vertex permutations."""
    best = None
    for perm in itertools.permutations(range(k)):
        lab = [0] * k
        for u in range(k):
            lab[perm[u]] = labels[u]
        es = tuple(sorted((min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in edges))
        cand = (tuple(lab), es)
        if best is None or cand < best:
            best = cand
    return (k, best[0], best[1])


@dataclass
class _Support:
    occurrences: int = 0
    images: list[set[int]] = field(default_factory=list)


def oracle_fsm(g: Graph, threshold: int, metric: str = "mni", *, max_edges: int = 3,
               max_vertices: int = ORACLE_MAX_VERTICES) -> dict[tuple, int]:
    """Support of every connected labeled pattern with up to ``max_edges`` edges.

    Returns ``{canonical key: support}`` for supports at or above ``threshold``.
    ``metric`` is ``"mni"`` (minimum image over all isomorphisms) or
    ``"embedding"`` (number of distinct edge-subset occurrences).
    """
    if metric not in ("mni", "embedding"):
        raise ValueError(f"unknown support metric {metric!r}")
    if g.labels is None:
        raise ValueError("frequent subgraph mining needs vertex labels")
    _check_size(g, max_vertices)
    lab = g.labels.tolist()
    edges = sorted(g.edges())
    incident: dict[int, list[int]] = defaultdict(list)
    for idx, (u, v) in enumerate(edges):
        incident[u].append(idx)
        incident[v].append(idx)

    # connected edge subsets, each generated once from its smallest edge index
    subsets: set[frozenset[int]] = set()

    def grow(cur: frozenset[int], verts: frozenset[int], smallest: int):
        subsets.add(cur)
        if len(cur) == max_edges:
            return
        for v in verts:
            for e in incident[v]:
                if e > smallest and e not in cur:
                    a, b = edges[e]
                    nxt = cur | {e}
                    if nxt not in subsets:
                        grow(nxt, verts | {a, b}, smallest)

    for i, (u, v) in enumerate(edges):
        grow(frozenset({i}), frozenset({u, v}), i)

    table: dict[tuple, _Support] = {}
    for sub in subsets:
        verts = sorted({x for e in sub for x in edges[e]})
        pos = {v: i for i, v in enumerate(verts)}
        k = len(verts)
        local = [(pos[edges[e][0]], pos[edges[e][1]]) for e in sub]
        labels = [lab[v] for v in verts]
        key = canonical_labeled(k, local, labels)
        sup = table.get(key)
        if sup is None:
            sup = table[key] = _Support(0, [set() for _ in range(k)])
        sup.occurrences += 1
        # every isomorphism from the canonical pattern onto this occurrence
        _, clabels, cedges = key
        edge_set = {tuple(sorted(x)) for x in local}
        for perm in itertools.permutations(range(k)):
            if any(clabels[c] != labels[perm[c]] for c in range(k)):
                continue
            if all(tuple(sorted((perm[a], perm[b]))) in edge_set for a, b in cedges):
                for c in range(k):
                    sup.images[c].add(verts[perm[c]])
    out = {}
    for key, sup in table.items():
        value = min(len(s) for s in sup.images) if metric == "mni" else sup.occurrences
        if value >= threshold:
            out[key] = value
    return dict(sorted(out.items()))


# ---------------------------------------------------------------------------
# dense contractions
# ---------------------------------------------------------------------------


def _dense(x) -> np.ndarray:
    if isinstance(x, (SparseMatrix, SparseTensor)):
        return x.to_dense()
    return np.asarray(x, dtype=np.float64)


def dense_reference(a, b, kind: str) -> np.ndarray:
    """Dense contraction: ``spgemm`` (A @ B), ``ttv`` (Σ_k A_ijk b_k) or ``ttm`` (Σ_l A_ijl B_kl)."""
    A, B = _dense(a), _dense(b)
    if A.size > _DENSE_LIMIT or B.size > _DENSE_LIMIT:
        raise OracleSizeError("operands too large to densify")
    if kind == "spgemm":
        if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
            raise ValueError(f"shape mismatch {A.shape} x {B.shape}")
        return np.einsum("ik,kj->ij", A, B)
    if kind == "ttv":
        if A.ndim != 3 or B.ndim != 1 or A.shape[2] != B.shape[0]:
            raise ValueError(f"shape mismatch {A.shape} x {B.shape}")
        return np.einsum("ijk,k->ij", A, B)
    if kind == "ttm":
        if A.ndim != 3 or B.ndim != 2 or A.shape[2] != B.shape[1]:
            raise ValueError(f"shape mismatch {A.shape} x {B.shape}")
        return np.einsum("ijl,kl->ijk", A, B)
    raise ValueError(f"unknown contraction {kind!r}")
