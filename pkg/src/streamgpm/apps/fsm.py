"""Frequent subgraph mining over labeled graphs (patterns of up to three edges).

Candidates grow level by level: every frequent pattern is extended by one
edge, either to a fresh vertex of any label or between two of its existing
vertices. Supports are computed from embeddings enumerated with stream set
operations. With the minimum-image metric a candidate is only evaluated when
all of its one-edge-smaller connected subpatterns are frequent. The
embedding-count metric (sFSM) is not anti-monotone, so it evaluates every
candidate that occurs at all and then reports which closure checks fail.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..graph import Graph
from ..isa import StreamAPI
from .mining import MiningResult

__all__ = [
    "SupportMetric",
    "LabeledPattern",
    "canonical_form",
    "subpatterns",
    "fsm",
    "downward_closure_audit",
    "FSM_MAX_EDGES",
]

FSM_MAX_EDGES = 3

# (k, labels, edges) with edges as sorted (u, v) pairs, u < v
LabeledPattern = tuple


@dataclass(frozen=True)
class SupportMetric:
    kind: str = "mni"  # "mni" (minimum image) or "embedding" (sFSM)
    threshold: int = 1

    def __post_init__(self):
        if self.kind not in ("mni", "embedding"):
            raise ValueError(f"unknown support metric {self.kind!r}; use 'mni' or 'embedding'")
        if self.threshold < 1:
            raise ValueError("support threshold must be at least 1")


def canonical_form(k: int, edges, labels) -> LabeledPattern:
    """Lexicographically smallest ``(labels, edges)`` over all vertex renamings."""
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


def _connected(k: int, edges) -> bool:
    adj = {u: set() for u in range(k)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen, stack = {0}, [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == k


def subpatterns(p: LabeledPattern) -> list[LabeledPattern]:
    """Connected patterns obtained by deleting one edge (and a vertex it leaves isolated)."""
    k, labels, edges = p
    out = set()
    for drop in edges:
        rest = [e for e in edges if e != drop]
        if not rest:
            continue
        used = sorted({x for e in rest for x in e})
        if len(used) < k - 1:
            continue
        pos = {v: i for i, v in enumerate(used)}
        es = [(pos[u], pos[v]) for u, v in rest]
        if _connected(len(used), es):
            out.add(canonical_form(len(used), es, [labels[v] for v in used]))
    return sorted(out)


def _extensions(p: LabeledPattern, label_set) -> set[LabeledPattern]:
    k, labels, edges = p
    eset = set(edges)
    out = set()
    for u in range(k):
        for lab in label_set:
            out.add(canonical_form(k + 1, list(edges) + [(u, k)], list(labels) + [lab]))
        for v in range(u + 1, k):
            if (u, v) not in eset:
                out.add(canonical_form(k, list(edges) + [(u, v)], labels))
    return out


def _automorphism_count(p: LabeledPattern) -> int:
    k, labels, edges = p
    eset = set(edges)
    n = 0
    for perm in itertools.permutations(range(k)):
        if all(labels[perm[u]] == labels[u] for u in range(k)) and all(
            (min(perm[u], perm[v]), max(perm[u], perm[v])) in eset for u, v in edges
        ):
            n += 1
    return n


class _Enumerator:
    """Enumerates every injective, label-preserving edge-preserving mapping through the stream API."""

    def __init__(self, g: Graph, api: StreamAPI):
        self.g = g
        self.api = api
        self.labels = g.labels.tolist()
        self.by_label: dict[int, list[int]] = {}
        for v, lab in enumerate(self.labels):
            self.by_label.setdefault(lab, []).append(v)

    def _order(self, p: LabeledPattern) -> list[int]:
        k, _, edges = p
        adj = {u: set() for u in range(k)}
        for u, v in edges:
            adj[u].add(v)
            adj[v].add(u)
        order = [max(range(k), key=lambda u: (len(adj[u]), -u))]
        while len(order) < k:
            placed = set(order)
            order.append(max((u for u in range(k) if u not in placed),
                             key=lambda u: (len(adj[u] & placed), len(adj[u]), -u)))
        return order

    def _candidates(self, anchors: list[int]) -> list[int]:
        api = self.api
        h = api.neighbor_set(anchors[0])
        for a in anchors[1:]:
            other = api.neighbor_set(a)
            nxt = api.intersect_vertex_set(h, other)
            api.release_vertex_set(h)
            api.release_vertex_set(other)
            h = nxt
        out = api.elements(h)
        api.release_vertex_set(h)
        return out

    def support(self, p: LabeledPattern) -> tuple[list[set[int]], int]:
        """Per-vertex image sets and the number of mappings."""
        k, labels, edges = p
        order = self._order(p)
        pos = {u: i for i, u in enumerate(order)}
        adj_earlier = []
        for j, u in enumerate(order):
            adj_earlier.append([pos[w] for w in range(k)
                                if ((min(u, w), max(u, w)) in set(edges)) and pos[w] < j])
        images = [set() for _ in range(k)]
        matched: list[int] = []
        count = 0

        def rec(j: int):
            nonlocal count
            if j == k:
                count += 1
                for i, x in enumerate(matched):
                    images[order[i]].add(x)
                return
            want = labels[order[j]]
            if j == 0:
                cands = self.by_label.get(want, [])
            else:
                cands = self._candidates([matched[a] for a in adj_earlier[j]])
            for x in cands:
                if self.labels[x] != want or x in matched:
                    continue
                matched.append(x)
                rec(j + 1)
                matched.pop()

        rec(0)
        return images, count


def downward_closure_audit(table: dict[LabeledPattern, int]) -> list[tuple[LabeledPattern, LabeledPattern]]:
    """``(pattern, missing subpattern)`` pairs where a reported pattern has an unreported subpattern."""
    bad = []
    for p in table:
        for sub in subpatterns(p):
            if sub not in table:
                bad.append((p, sub))
    return bad


def fsm(g: Graph, metric: SupportMetric | str = "mni", threshold: int | None = None, *,
        max_edges: int = FSM_MAX_EDGES, n_stream_regs: int = 16) -> MiningResult:
    """Frequent labeled patterns with at most ``max_edges`` edges.

    ``metric`` may be a :class:`SupportMetric` or the kind string, in which
    case ``threshold`` is required. The result's ``frequent`` list holds
    ``(canonical pattern, support)`` sorted by pattern.
    """
    if isinstance(metric, str):
        if threshold is None:
            raise ValueError("threshold is required")
        metric = SupportMetric(metric, threshold)
    if g.labels is None:
        raise ValueError("frequent subgraph mining needs vertex labels (supply a label file)")
    if not 1 <= max_edges <= FSM_MAX_EDGES:
        raise ValueError(f"max_edges must be within 1..{FSM_MAX_EDGES}")
    api = StreamAPI(g, n_stream_regs=n_stream_regs)
    enum = _Enumerator(g, api)
    label_set = sorted(set(enum.labels))
    mni = metric.kind == "mni"

    def evaluate(p):
        images, maps = enum.support(p)
        if mni:
            return min(len(s) for s in images)
        return maps // _automorphism_count(p)

    table: dict[LabeledPattern, int] = {}
    frontier: set[LabeledPattern] = set()
    for u, v in g.edges():
        frontier.add(canonical_form(2, [(0, 1)], [enum.labels[u], enum.labels[v]]))
    level = 1
    while frontier:
        grow_from = []
        for p in sorted(frontier):
            if mni and level > 1 and any(sub not in table for sub in subpatterns(p)):
                continue
            value = evaluate(p)
            if value >= metric.threshold:
                table[p] = value
            # sFSM keeps extending anything that occurs; min-image only frequent patterns
            if value >= (metric.threshold if mni else 1):
                grow_from.append(p)
        if level == max_edges:
            break
        frontier = set()
        for p in grow_from:
            frontier |= _extensions(p, label_set)
        level += 1

    table = dict(sorted(table.items()))
    violations = downward_closure_audit(table)
    res = MiningResult("FSM" if mni else "sFSM", {}, trace_length=len(api.trace))
    res.frequent = list(table.items())
    res.closure_violations = violations
    if violations and not mni:
        res.warnings.append(
            f"embedding-count support is not anti-monotone: {len(violations)} reported pattern(s) "
            "have a subpattern below the threshold"
        )
    from ..isa import lifecycle_audit
    from ..isa.trace import stream_length_histogram

    res.histogram = stream_length_histogram(api.trace)
    res.audit = lifecycle_audit(api.trace)
    return res
