"""Pattern-counting workloads built on the compiler and the functional executor."""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from ..compiler import (
    CodegenOptions,
    FallbackWarning,
    Pattern,
    clique,
    codegen,
    compile_pattern,
    tailed_triangle,
    triangle,
    wedge,
)
from ..graph import Graph
from ..isa import AuditReport, Machine, Program, TraceEvent, lifecycle_audit, place_graph
from ..isa.trace import length_cdf, stream_length_histogram

__all__ = ["APPS", "MiningResult", "app_patterns", "count_pattern", "mine_pattern", "run_programs"]

# app name -> patterns it counts (TM counts two patterns side by side)
APPS: dict[str, tuple[str, ...]] = {
    "T": ("triangle",),
    "TC": ("wedge",),
    "TT": ("tailed-triangle",),
    "TM": ("triangle", "wedge"),
    "4C": ("4-clique",),
    "5C": ("5-clique",),
}


def app_patterns(app: str) -> list[Pattern]:
    """Patterns an app counts. Cliques and the tailed triangle are edge-induced, wedges vertex-induced."""
    makers = {
        "triangle": triangle,
        "wedge": lambda: wedge("vertex"),
        "tailed-triangle": tailed_triangle,
        "4-clique": lambda: clique(4),
        "5-clique": lambda: clique(5),
    }
    key = app.upper()
    if key not in APPS:
        raise ValueError(f"unknown app {app!r}; choose from {', '.join(APPS)}")
    return [makers[name]() for name in APPS[key]]


@dataclass
class MiningResult:
    app: str
    counts: dict[str, int]
    nested: bool = True
    trace_length: int = 0
    histogram: dict[int, int] = field(default_factory=dict)
    audit: AuditReport | None = None
    stats: Any = None  # timing.SimStats when timing was requested
    warnings: list[str] = field(default_factory=list)
    frequent: list[tuple[tuple, int]] | None = None  # FSM only
    closure_violations: list[tuple] | None = None  # FSM only
    trace: list[TraceEvent] | None = None

    @property
    def count(self) -> int:
        return sum(self.counts.values())

    @property
    def cdf(self) -> list[tuple[int, float]]:
        return length_cdf(self.histogram)


def _split(n: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, n)) if n else 1
    step, extra = divmod(n, parts)
    out, lo = [], 0
    for i in range(parts):
        hi = lo + step + (1 if i < extra else 0)
        out.append((lo, hi))
        lo = hi
    return out


def _labels_addr(machine: Machine, g: Graph) -> int:
    import numpy as np

    if g.labels is None:
        return 0
    return machine.memory.place(np.ascontiguousarray(g.labels, dtype=np.uint32), "labels")


def run_programs(g: Graph, programs: list[Program], *, trace: bool, lo: int = 0, hi: int | None = None,
                 n_stream_regs: int = 16):
    """Run programs back to back on one machine over level-0 range ``[lo, hi)``.

    Returns ``(results, events)`` where ``events`` is the concatenated trace
    (empty when ``trace`` is False).
    """
    hi = g.num_vertices if hi is None else hi
    m = Machine(n_stream_regs=n_stream_regs)
    lay = place_graph(m.memory, g)
    labels = _labels_addr(m, g)
    results: list[int] = []
    events: list[TraceEvent] = []
    for prog in programs:
        inputs = {1: lo, 2: hi, 4: lay.index_addr, 5: lay.edges_addr, 6: lay.offset_addr, 7: labels}
        if trace:
            events.extend(m.run(prog, inputs, trace=True))
        else:
            for _ in m.run(prog, inputs, trace=False):
                pass
        results.append(int(m.regs[3]))
    return results, events


def mine_pattern(g: Graph, patterns: list[Pattern], *, app: str = "custom", nested: bool = True,
                 timing: bool = False, config=None, partitions: int = 1, workers: int = 1,
                 keep_trace: bool = False) -> MiningResult:
    """Compile ``patterns``, run them on ``g`` and (optionally) replay the trace through the timing model.

    With ``partitions > 1`` the level-0 vertex range is split and the pieces
    run on independent machines (on ``workers`` threads); counts do not
    depend on the split. Timing always uses a single unpartitioned run.
    """
    opts = CodegenOptions(nested=nested)
    msgs: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", FallbackWarning)
        programs = [codegen(compile_pattern(p), opts) for p in patterns]
    msgs.extend(str(w.message) for w in caught)
    for prog in programs:
        msgs.extend(w for w in prog.warnings if w not in msgs)
    names = [p.name or f"pattern{i}" for i, p in enumerate(patterns)]

    want_trace = timing or keep_trace or partitions <= 1
    if partitions > 1 and not timing:
        ranges = _split(g.num_vertices, partitions)
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            parts = list(pool.map(lambda r: run_programs(g, programs, trace=keep_trace, lo=r[0], hi=r[1]),
                                  ranges))
        totals = [sum(res[i] for res, _ in parts) for i in range(len(programs))]
        events = [ev for _, evs in parts for ev in evs]
    else:
        totals, events = run_programs(g, programs, trace=want_trace)

    result = MiningResult(app, dict(zip(names, totals)), nested=nested, warnings=msgs)
    if events:
        result.trace_length = len(events)
        result.histogram = stream_length_histogram(events)
        result.audit = lifecycle_audit(events)
    if timing:
        from ..timing import SimConfig, simulate

        result.stats = simulate(events, config if config is not None else SimConfig())
    if keep_trace:
        result.trace = events
    return result


def count_pattern(g: Graph, app: str, *, nested: bool = True, timing: bool = False, config=None,
                  partitions: int = 1, workers: int = 1, keep_trace: bool = False) -> MiningResult:
    """Run one of the named counting apps (T, TC, TT, TM, 4C, 5C)."""
    return mine_pattern(g, app_patterns(app), app=app.upper(), nested=nested, timing=timing, config=config,
                        partitions=partitions, workers=workers, keep_trace=keep_trace)
