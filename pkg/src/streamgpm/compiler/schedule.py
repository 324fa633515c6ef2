"""Enumeration schedules: matching order, per-level set formulas and bounds."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..graph import Graph
from .pattern import Pattern, PatternError, derive_restrictions, restriction_closure

__all__ = ["Level", "Schedule", "matching_order", "compile_pattern", "naive_count"]


@dataclass(frozen=True)
class Level:
    """How level ``index`` of the loop nest draws its candidates.

    Candidates are ``∩ N(v_a) for a in intersect`` minus ``∪ N(v_b) for b in
    subtract``, keeping keys below ``min(v_u for u in upper)`` and above every
    ``v_l for l in lower``. Earlier matched vertices are classified as
    ``excluded`` (provably absent from the set), ``static_included`` (provably
    present, so they are skipped or subtracted from counts) or ``dynamic``
    (membership depends on the data and must be tested per candidate).
    """

    index: int
    vertex: int
    intersect: tuple[int, ...]
    subtract: tuple[int, ...]
    upper: tuple[int, ...]
    lower: tuple[int, ...]
    excluded: tuple[int, ...]
    static_included: tuple[int, ...]
    dynamic: tuple[int, ...]
    label: int | None = None

    @property
    def depends_on(self) -> frozenset[int]:
        """Earlier levels this level's candidate set (and its filters) read."""
        return frozenset(self.intersect + self.subtract + self.upper + self.lower + self.dynamic)

    def formula(self) -> str:
        if self.index == 0:
            return "V"
        s = " ∩ ".join(f"N(v{a})" for a in self.intersect)
        if self.subtract:
            s += " − " + " − ".join(f"N(v{b})" for b in self.subtract)
        if self.upper:
            s += " < " + ("v%d" % self.upper[0] if len(self.upper) == 1 else
                          "min(" + ", ".join(f"v{u}" for u in self.upper) + ")")
        return s


@dataclass(frozen=True)
class Schedule:
    pattern: Pattern
    order: tuple[int, ...]
    restrictions: frozenset[tuple[int, int]]
    levels: tuple[Level, ...]

    @property
    def k(self) -> int:
        return self.pattern.k

    def describe(self) -> str:
        lines = [f"order: {list(self.order)}",
                 "restrictions: " + ", ".join(f"v{i}<v{j}" for i, j in sorted(self.restrictions))]
        for lv in self.levels:
            lines.append(f"  level {lv.index} (pattern vertex {lv.vertex}): {lv.formula()}")
        return "\n".join(lines)


def matching_order(p: Pattern) -> tuple[int, ...]:
    """Greedy order: most already-matched neighbors, then degree, then vertex index."""
    first = min(range(p.k), key=lambda v: (-p.degree(v), v))
    order = [first]
    while len(order) < p.k:
        placed = set(order)
        cand = [v for v in range(p.k) if v not in placed]
        best = min(cand, key=lambda v: (-len(p.neighbors(v) & placed), -p.degree(v), v))
        if not p.neighbors(best) & placed:
            raise PatternError("pattern is disconnected")
        order.append(best)
    return tuple(order)


def compile_pattern(p: Pattern, order: Sequence[int] | None = None,
                    restrictions: frozenset[tuple[int, int]] | None = None) -> Schedule:
    order = tuple(order) if order is not None else matching_order(p)
    if sorted(order) != list(range(p.k)):
        raise PatternError("order must be a permutation of the pattern vertices")
    for j in range(1, p.k):
        if not any(p.adjacent(order[i], order[j]) for i in range(j)):
            raise PatternError("every prefix of the matching order must be connected")
    if restrictions is None:
        restrictions = derive_restrictions(p, order)
    closure = restriction_closure(restrictions)
    vertex_mode = p.mode == "vertex"
    levels = []
    for j in range(p.k):
        u = order[j]
        inter = tuple(i for i in range(j) if p.adjacent(order[i], u))
        sub = tuple(i for i in range(j) if vertex_mode and not p.adjacent(order[i], u))
        upper = tuple(i for i in range(j) if (j, i) in closure)
        lower = tuple(i for i in range(j) if (i, j) in closure)
        excluded, included, dynamic = [], [], []
        for i in range(j):
            if i in inter or i in upper or i in lower:
                excluded.append(i)
            elif any((w, i) in closure for w in upper):
                # v_w < v_i for some upper bound w, so v_i sits at or above the bound
                excluded.append(i)
            elif any((i, w) in closure for w in lower):
                excluded.append(i)
            elif vertex_mode and any(not p.adjacent(order[i], order[a]) for a in inter):
                excluded.append(i)
            elif (
                all(p.adjacent(order[i], order[a]) for a in inter)
                and all(vertex_mode and not p.adjacent(order[i], order[b]) for b in sub)
                and all((i, w) in closure for w in upper)
                and all((w, i) in closure for w in lower)
            ):
                included.append(i)
            else:
                dynamic.append(i)
        label = p.labels[u] if p.labels is not None else None
        levels.append(Level(j, u, inter, sub, upper, lower, tuple(excluded), tuple(included),
                            tuple(dynamic), label))
    return Schedule(p, order, frozenset(restrictions), tuple(levels))


def naive_count(s: Schedule, g: Graph) -> int:
    """Interpret the schedule directly with Python sets (reference for the code generator)."""
    nbr = [set(g.neighbors(v).tolist()) for v in range(g.num_vertices)]
    labels = g.labels.tolist() if g.labels is not None else None
    if s.pattern.labels is not None and labels is None:
        raise PatternError("labeled pattern needs a labeled graph")
    matched: list[int] = []

    def candidates(lv: Level):
        if lv.index == 0:
            cand = set(range(g.num_vertices))
        else:
            cand = set.intersection(*(nbr[matched[a]] for a in lv.intersect))
            for b in lv.subtract:
                cand -= nbr[matched[b]]
        cand -= set(matched)
        for u in lv.upper:
            cand = {x for x in cand if x < matched[u]}
        for lo in lv.lower:
            cand = {x for x in cand if x > matched[lo]}
        if lv.label is not None:
            cand = {x for x in cand if labels[x] == lv.label}
        return cand

    def rec(j: int) -> int:
        lv = s.levels[j]
        cand = candidates(lv)
        if j == s.k - 1:
            return len(cand)
        total = 0
        for x in sorted(cand):
            matched.append(x)
            total += rec(j + 1)
            matched.pop()
        return total

    return rec(0)
