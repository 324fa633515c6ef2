"""Dynamic trace records, stream-length statistics and the lifecycle audit."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from .instructions import Opcode

__all__ = [
    "NestedElement",
    "TraceEvent",
    "stream_length_histogram",
    "length_cdf",
    "write_jsonl",
    "read_jsonl",
    "AuditReport",
    "lifecycle_audit",
    "MERGE_OPS",
]

MERGE_OPS = frozenset({Opcode.S_INTER, Opcode.S_INTER_C, Opcode.S_SUB, Opcode.S_SUB_C})
_DEFINE_OPS = frozenset({Opcode.S_READ, Opcode.S_VREAD, Opcode.S_INTER, Opcode.S_SUB})


@dataclass(frozen=True, slots=True)
class NestedElement:
    """One element ``s_i`` of an S_NESTINTER expansion."""

    vertex: int
    info_addrs: tuple[int, ...]
    prefix_addr: int
    prefix_len: int
    count: int
    comparisons: int
    read_s: int
    read_prefix: int


@dataclass(slots=True)
class TraceEvent:
    seq: int
    op: Opcode
    pc: int = -1
    kind: str = ""
    count: int = 1
    src_regs: tuple[int, ...] = ()
    dst_regs: tuple[int, ...] = ()
    sids_in: tuple[int, ...] = ()
    sid_out: int | None = None
    deps: tuple[int, ...] = ()
    in_lens: tuple[int, ...] = ()
    out_len: int = 0
    reads: tuple[int, ...] = ()
    comparisons: int = 0
    bound: int = -1
    key_ranges: tuple[tuple[int, int], ...] = ()
    out_addr: int = 0
    loads: tuple[int, ...] = ()
    value_loads: tuple[tuple[int, int], ...] = ()
    nested: tuple[NestedElement, ...] = ()
    result: float | int | None = None
    # SCALAR bundles: (register, outside registers it depends on, load addresses on its chain)
    reg_deps: tuple[tuple[int, tuple[int, ...], tuple[int, ...]], ...] = ()

    @property
    def is_stream(self) -> bool:
        return self.op is not Opcode.SCALAR

    def to_dict(self) -> dict:
        d = {
            "seq": self.seq,
            "op": self.op.mnemonic,
            "pc": self.pc,
        }
        for name in (
            "kind", "count", "src_regs", "dst_regs", "sids_in", "sid_out", "deps", "in_lens",
            "out_len", "reads", "comparisons", "bound", "key_ranges", "out_addr", "loads",
            "value_loads", "result",
        ):
            value = getattr(self, name)
            if value in ((), "", None):
                continue
            d[name] = [list(v) if isinstance(v, tuple) else v for v in value] if isinstance(value, tuple) else value
        if self.reg_deps:
            d["reg_deps"] = [[r, list(srcs), list(lds)] for r, srcs, lds in self.reg_deps]
        if self.nested:
            d["nested"] = [
                [e.vertex, list(e.info_addrs), e.prefix_addr, e.prefix_len, e.count, e.comparisons,
                 e.read_s, e.read_prefix]
                for e in self.nested
            ]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> TraceEvent:
        kw = dict(d)
        kw["op"] = Opcode(kw["op"])
        for name in ("src_regs", "dst_regs", "sids_in", "deps", "in_lens", "reads", "loads"):
            if name in kw:
                kw[name] = tuple(kw[name])
        if "key_ranges" in kw:
            kw["key_ranges"] = tuple(tuple(r) for r in kw["key_ranges"])
        if "value_loads" in kw:
            kw["value_loads"] = tuple(tuple(r) for r in kw["value_loads"])
        if "reg_deps" in kw:
            kw["reg_deps"] = tuple((r, tuple(srcs), tuple(lds)) for r, srcs, lds in kw["reg_deps"])
        if "nested" in kw:
            kw["nested"] = tuple(
                NestedElement(v, tuple(info), pa, pl, c, k, rs, rp) for v, info, pa, pl, c, k, rs, rp in kw["nested"]
            )
        return cls(**kw)


def stream_length_histogram(trace: Iterable[TraceEvent]) -> dict[int, int]:
    """Input-stream lengths of every intersection/subtraction, nested sub-operations included."""
    hist: Counter[int] = Counter()
    for ev in trace:
        if ev.op in MERGE_OPS:
            hist.update(ev.in_lens)
        elif ev.op is Opcode.S_NESTINTER:
            s_len = ev.in_lens[0] if ev.in_lens else 0
            for e in ev.nested:
                hist[s_len] += 1
                hist[e.prefix_len] += 1
    return dict(sorted(hist.items()))


def length_cdf(hist: dict[int, int]) -> list[tuple[int, float]]:
    """``(length, fraction of streams with length <= length)`` points; empty for an empty histogram."""
    total = sum(hist.values())
    if total == 0:
        return []
    points = []
    running = 0
    for length in sorted(hist):
        running += hist[length]
        points.append((length, running / total))
    points[-1] = (points[-1][0], 1.0)
    return points


def write_jsonl(trace: Iterable[TraceEvent], fh: IO[str]) -> int:
    n = 0
    for ev in trace:
        fh.write(json.dumps(ev.to_dict(), separators=(",", ":")))
        fh.write("\n")
        n += 1
    return n


def read_jsonl(fh: IO[str]) -> list[TraceEvent]:
    return [TraceEvent.from_dict(json.loads(line)) for line in fh if line.strip()]


@dataclass
class AuditReport:
    defines: int = 0
    frees: int = 0
    high_water: int = 0
    unfreed: list[int] = field(default_factory=list)
    double_frees: list[int] = field(default_factory=list)
    late_frees: list[tuple[int, int]] = field(default_factory=list)
    fallback_ops: int = 0

    @property
    def ok(self) -> bool:
        return not (self.unfreed or self.double_frees or self.late_frees)

    def summary(self) -> str:
        return (
            f"defines={self.defines} frees={self.frees} high_water={self.high_water} "
            f"unfreed={len(self.unfreed)} double_frees={len(self.double_frees)} "
            f"late_frees={len(self.late_frees)} fallback_ops={self.fallback_ops}"
        )


def lifecycle_audit(trace: Sequence[TraceEvent] | Iterable[TraceEvent]) -> AuditReport:
    """Check matched define/free pairs, the live-stream high-water mark and eager freeing.

    A free is *late* when some stream instruction other than another S_FREE
    sits between the stream's last use and its S_FREE. Redefining a live ID
    without freeing it first is reported as an unfreed stream.
    """
    rep = AuditReport()
    live: dict[int, int] = {}  # sid -> seq of the last stream event that used it
    last_non_free_seq = -1
    for ev in trace:
        if ev.op is Opcode.SCALAR:
            if ev.kind == "setop":
                rep.fallback_ops += ev.count
            continue
        if ev.op is Opcode.S_FREE:
            sid = ev.sids_in[0]
            if sid not in live:
                rep.double_frees.append(ev.seq)
            else:
                last_use = live.pop(sid)
                if last_non_free_seq > last_use:
                    rep.late_frees.append((sid, ev.seq))
                rep.frees += 1
            continue
        for sid in ev.sids_in:
            if sid in live:
                live[sid] = ev.seq
        if ev.op in _DEFINE_OPS and ev.sid_out is not None:
            if ev.sid_out in live:
                rep.unfreed.append(ev.sid_out)
            live[ev.sid_out] = ev.seq
            rep.defines += 1
            rep.high_water = max(rep.high_water, len(live))
        last_non_free_seq = ev.seq
    rep.unfreed.extend(sorted(live))
    return rep
