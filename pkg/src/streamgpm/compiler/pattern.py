"""Small pattern graphs, their automorphisms and symmetry-breaking restrictions."""
from __future__ import annotations

import itertools
import io
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

__all__ = [
    "MAX_PATTERN_SIZE",
    "PatternError",
    "Pattern",
    "automorphisms",
    "derive_restrictions",
    "restriction_closure",
    "transitive_reduction",
    "load_pattern",
    "parse_pattern",
    "triangle",
    "wedge",
    "tailed_triangle",
    "clique",
    "path",
    "cycle",
    "star",
]

MAX_PATTERN_SIZE = 5


class PatternError(ValueError):
    pass


@dataclass(frozen=True)
class Pattern:
    """Connected simple pattern graph on vertices ``0..k-1``.

    ``mode`` is ``"edge"`` (non-edges of the pattern are unconstrained) or
    ``"vertex"`` (non-edges must be non-edges in the embedding).
    """

    k: int
    edges: frozenset[tuple[int, int]]
    labels: tuple[int, ...] | None = None
    mode: str = "edge"
    name: str = ""
    _adj: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)

    def __init__(self, k: int, edges: Iterable[tuple[int, int]], labels: Sequence[int] | None = None,
                 mode: str = "edge", name: str = "", *, max_size: int = MAX_PATTERN_SIZE):
        if not 1 <= k <= max_size:
            raise PatternError(f"pattern size {k} outside [1, {max_size}]")
        norm = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < k and 0 <= v < k):
                raise PatternError(f"edge ({u}, {v}) references a vertex outside 0..{k - 1}")
            if u == v:
                raise PatternError("patterns cannot have self-loops")
            norm.add((min(u, v), max(u, v)))
        if mode not in ("edge", "vertex"):
            raise PatternError(f"unknown matching mode {mode!r}")
        if labels is not None:
            labels = tuple(int(x) for x in labels)
            if len(labels) != k:
                raise PatternError("need one label per pattern vertex")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "edges", frozenset(norm))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "name", name)
        adj = [set() for _ in range(k)]
        for u, v in norm:
            adj[u].add(v)
            adj[v].add(u)
        object.__setattr__(self, "_adj", tuple(frozenset(a) for a in adj))
        if not self._connected():
            raise PatternError("pattern is disconnected; only connected patterns are supported")

    def _connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in self._adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.k

    def adjacent(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def neighbors(self, u: int) -> frozenset[int]:
        return self._adj[u]

    def degree(self, u: int) -> int:
        return len(self._adj[u])

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def with_mode(self, mode: str) -> Pattern:
        return Pattern(self.k, self.edges, self.labels, mode, self.name)

    def with_labels(self, labels: Sequence[int] | None) -> Pattern:
        return Pattern(self.k, self.edges, labels, self.mode, self.name)

    def relabel(self, perm: Sequence[int]) -> Pattern:
        """Pattern with vertex ``u`` renamed to ``perm[u]``."""
        labels = None
        if self.labels is not None:
            lab = [0] * self.k
            for u in range(self.k):
                lab[perm[u]] = self.labels[u]
            labels = lab
        return Pattern(self.k, ((perm[u], perm[v]) for u, v in self.edges), labels, self.mode, self.name)

    def to_text(self) -> str:
        out = [str(self.k)]
        out += [f"{u} {v}" for u, v in sorted(self.edges)]
        if self.labels is not None:
            out += [f"label {v} {lab}" for v, lab in enumerate(self.labels)]
        return "\n".join(out) + "\n"

    def __str__(self) -> str:
        body = ",".join(f"{u}-{v}" for u, v in sorted(self.edges))
        lab = f" labels={list(self.labels)}" if self.labels is not None else ""
        return f"{self.name or 'pattern'}(k={self.k}; {body}; {self.mode}{lab})"


def parse_pattern(text: str, mode: str = "edge", name: str = "") -> Pattern:
    return load_pattern(io.StringIO(text), mode=mode, name=name)


def load_pattern(source: str | os.PathLike | TextIO, mode: str = "edge", name: str = "") -> Pattern:
    """Read ``k`` on the first line, then ``u v`` edges and optional ``label v l`` lines."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()  # type: ignore[union-attr]
    else:
        with open(source, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    k = None
    edges = []
    labels: dict[int, int] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        try:
            if k is None:
                if len(toks) != 1:
                    raise PatternError(f"line {lineno}: first line must hold the vertex count")
                k = int(toks[0])
            elif toks[0] == "label":
                labels[int(toks[1])] = int(toks[2])
            elif len(toks) == 2:
                edges.append((int(toks[0]), int(toks[1])))
            else:
                raise PatternError(f"line {lineno}: expected 'u v' or 'label v l'")
        except (ValueError, IndexError):
            raise PatternError(f"line {lineno}: malformed pattern line {raw!r}") from None
    if k is None:
        raise PatternError("empty pattern file")
    lab = None
    if labels:
        if set(labels) != set(range(k)):
            raise PatternError("labels must cover every pattern vertex")
        lab = [labels[v] for v in range(k)]
    return Pattern(k, edges, lab, mode, name)


# ---------------------------------------------------------------------------
# symmetry
# ---------------------------------------------------------------------------


def automorphisms(p: Pattern) -> list[tuple[int, ...]]:
    """All label-preserving permutations ``pi`` with ``adj(pi[u], pi[v]) == adj(u, v)``."""
    out = []
    for perm in itertools.permutations(range(p.k)):
        if p.labels is not None and any(p.labels[perm[u]] != p.labels[u] for u in range(p.k)):
            continue
        if all((min(perm[u], perm[v]), max(perm[u], perm[v])) in p.edges for u, v in p.edges):
            out.append(perm)
    return out


def restriction_closure(pairs: Iterable[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    """Transitive closure of ``(a, b)`` meaning ``a < b``."""
    closed = set(pairs)
    changed = True
    while changed:
        changed = False
        for a, b in list(closed):
            for c, d in list(closed):
                if b == c and (a, d) not in closed:
                    closed.add((a, d))
                    changed = True
    return frozenset(closed)


def transitive_reduction(pairs: Iterable[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    closed = restriction_closure(pairs)
    nodes = {x for pair in closed for x in pair}
    return frozenset(
        (a, b) for a, b in closed if not any((a, m) in closed and (m, b) in closed for m in nodes)
    )


def derive_restrictions(p: Pattern, order: Sequence[int]) -> frozenset[tuple[int, int]]:
    """Symmetry-breaking restrictions over matching levels.

    Returns pairs ``(i, j)`` of level indices meaning ``v_i < v_j``. Walks the
    levels in order; at each level the orbit of that level under the current
    stabilizer subgroup is forced below it, then the group shrinks to the
    stabilizer of the level. Exactly one representative of every automorphism
    class of assignments survives. The result is transitively reduced.
    """
    pos = {v: i for i, v in enumerate(order)}
    # automorphisms expressed on level indices
    group = [tuple(pos[perm[order[i]]] for i in range(p.k)) for perm in automorphisms(p)]
    pairs = set()
    for i in range(p.k):
        orbit = {g[i] for g in group}
        for j in orbit:
            if j != i:
                pairs.add((j, i))
        group = [g for g in group if g[i] == i]
    return transitive_reduction(pairs)


# ---------------------------------------------------------------------------
# named patterns
# ---------------------------------------------------------------------------


def clique(k: int, mode: str = "edge") -> Pattern:
    return Pattern(k, itertools.combinations(range(k), 2), mode=mode, name=f"{k}-clique")


def triangle(mode: str = "edge") -> Pattern:
    return Pattern(3, [(0, 1), (1, 2), (0, 2)], mode=mode, name="triangle")


def wedge(mode: str = "vertex") -> Pattern:
    """Three-vertex path with the center at vertex 1."""
    return Pattern(3, [(0, 1), (1, 2)], mode=mode, name="wedge")


def tailed_triangle(mode: str = "edge") -> Pattern:
    """Triangle 0-1-2 with a tail vertex 3 attached to vertex 0."""
    return Pattern(4, [(0, 1), (1, 2), (0, 2), (0, 3)], mode=mode, name="tailed-triangle")


def path(k: int, mode: str = "edge") -> Pattern:
    return Pattern(k, [(i, i + 1) for i in range(k - 1)], mode=mode, name=f"{k}-path")


def cycle(k: int, mode: str = "edge") -> Pattern:
    return Pattern(k, [(i, (i + 1) % k) for i in range(k)], mode=mode, name=f"{k}-cycle")


def star(leaves: int, mode: str = "edge") -> Pattern:
    return Pattern(leaves + 1, [(0, i) for i in range(1, leaves + 1)], mode=mode, name=f"{leaves}-star")
