"""Architectural state and the functional executor.

The executor interprets a :class:`Program` against a flat byte-addressed
:class:`Memory` and a :class:`StreamTable`, computing every stream result with
the merge kernels and emitting one :class:`TraceEvent` per dynamic stream
instruction. Consecutive scalar instructions are folded into a single
``SCALAR`` event whose ``count`` is the number of instructions folded.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from .. import kernels as K
from ..graph import EOS, Graph
from .instructions import SIGNATURES, Imm, Opcode, Program, Reg, Sym
from .trace import NestedElement, TraceEvent

__all__ = [
    "MachineError",
    "MemoryFault",
    "StreamError",
    "UndefinedStreamError",
    "StreamKindError",
    "StreamOverflowError",
    "Memory",
    "CSRLayout",
    "place_graph",
    "StreamEntry",
    "StreamTable",
    "Machine",
    "Execution",
    "execute",
    "KEY_BYTES",
    "VALUE_BYTES",
    "DEFAULT_STREAM_REGS",
]

KEY_BYTES = 4
VALUE_BYTES = 8
DEFAULT_STREAM_REGS = 16
_BUNDLE_CAP = 32


class MachineError(RuntimeError):
    pass


class MemoryFault(MachineError):
    pass


class StreamError(MachineError):
    pass


class UndefinedStreamError(StreamError):
    pass


class StreamKindError(StreamError):
    pass


class StreamOverflowError(StreamError):
    pass


# ---------------------------------------------------------------------------
# memory
# ---------------------------------------------------------------------------


class Memory:
    """Byte-addressed memory made of typed regions (uint32 keys or float64 values)."""

    def __init__(self, base: int = 0x10000):
        self._next = base
        self._bases: list[int] = []
        self._regions: list[tuple[int, np.ndarray, str]] = []

    def _insert(self, base: int, arr: np.ndarray, name: str) -> None:
        i = bisect.bisect_left(self._bases, base)
        self._bases.insert(i, base)
        self._regions.insert(i, (base, arr, name))

    def place(self, array, name: str = "", align: int = 64) -> int:
        """Map a 1-D uint32 or float64 array; returns its base address."""
        arr = np.asarray(array)
        if arr.dtype not in (np.uint32, np.float64) or arr.ndim != 1:
            raise TypeError("regions must be 1-D uint32 or float64 arrays")
        base = -(-self._next // align) * align
        self._next = base + max(arr.nbytes, 1)
        self._insert(base, arr, name)
        return base

    def reserve(self, nbytes: int, align: int = 64) -> int:
        """Claim an address range with no backing data (for produced streams)."""
        base = -(-self._next // align) * align
        self._next = base + max(nbytes, 1)
        return base

    def region(self, addr: int) -> tuple[int, np.ndarray, str]:
        i = bisect.bisect_right(self._bases, addr) - 1
        if i >= 0:
            base, arr, name = self._regions[i]
            if addr < base + arr.nbytes:
                return base, arr, name
        raise MemoryFault(f"address {addr:#x} is not mapped")

    def _slice(self, addr: int, n: int, dtype) -> np.ndarray:
        if n < 0:
            raise MemoryFault(f"negative length {n}")
        if n == 0:
            return np.zeros(0, dtype=dtype)
        base, arr, _ = self.region(addr)
        if arr.dtype != dtype:
            raise MemoryFault(f"address {addr:#x} holds {arr.dtype}, not {np.dtype(dtype)}")
        off, rem = divmod(addr - base, arr.itemsize)
        if rem or off + n > len(arr):
            raise MemoryFault(f"access [{addr:#x}, +{n}) crosses a region boundary")
        return arr[off : off + n]

    def keys(self, addr: int, n: int) -> np.ndarray:
        return self._slice(addr, n, np.uint32)

    def values(self, addr: int, n: int) -> np.ndarray:
        return self._slice(addr, n, np.float64)

    def word(self, addr: int) -> int:
        return int(self._slice(addr, 1, np.uint32)[0])

    def array_at(self, addr: int) -> np.ndarray:
        base, arr, _ = self.region(addr)
        if base != addr:
            raise MemoryFault(f"{addr:#x} is not the start of a region")
        return arr


@dataclass(frozen=True)
class CSRLayout:
    index_addr: int
    edges_addr: int
    offset_addr: int
    num_vertices: int


def place_graph(memory: Memory, g: Graph) -> CSRLayout:
    index = np.ascontiguousarray(g.csr_index.reshape(-1))
    edges = g.csr_edges if len(g.csr_edges) else np.zeros(1, np.uint32)
    return CSRLayout(
        memory.place(index, "csr_index"),
        memory.place(np.ascontiguousarray(edges), "csr_edges"),
        memory.place(np.ascontiguousarray(g.csr_bound_offset), "csr_offset"),
        g.num_vertices,
    )


# ---------------------------------------------------------------------------
# stream mapping table
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class StreamEntry:
    sid: int
    reg: int
    keys: np.ndarray
    addr: int
    kind: str = "key"  # "key" or "kv"
    vaddr: int = 0
    producer: int = -1
    v_d: bool = True
    v_a: bool = True


class StreamTable:
    """Maps program stream IDs to a fixed pool of stream registers."""

    def __init__(self, n_regs: int = DEFAULT_STREAM_REGS):
        if n_regs < 1:
            raise ValueError("need at least one stream register")
        self.n_regs = n_regs
        self._entries: dict[int, StreamEntry] = {}
        self._free_regs = list(range(n_regs - 1, -1, -1))
        self.high_water = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, sid: int) -> bool:
        return sid in self._entries

    def define(self, sid: int, keys: np.ndarray, addr: int, *, kind: str = "key", vaddr: int = 0,
               producer: int = -1) -> StreamEntry:
        old = self._entries.get(sid)
        if old is not None:
            reg = old.reg  # the previous mapping is overwritten in place
        elif self._free_regs:
            reg = self._free_regs.pop()
        else:
            raise StreamOverflowError(
                f"defining stream {sid}: all {self.n_regs} stream registers are active"
            )
        entry = StreamEntry(sid, reg, keys, addr, kind, vaddr, producer)
        self._entries[sid] = entry
        self.high_water = max(self.high_water, len(self._entries))
        return entry

    def get(self, sid: int) -> StreamEntry:
        try:
            return self._entries[sid]
        except KeyError:
            raise UndefinedStreamError(f"stream {sid} is not defined") from None

    def free(self, sid: int) -> StreamEntry:
        entry = self._entries.pop(sid, None)
        if entry is None or not entry.v_d:
            raise UndefinedStreamError(f"S_FREE of stream {sid}, which is not defined")
        entry.v_d = entry.v_a = False
        self._free_regs.append(entry.reg)
        return entry

    def active(self) -> list[int]:
        return sorted(self._entries)


# ---------------------------------------------------------------------------
# executor
# ---------------------------------------------------------------------------

# dense opcode numbers for the interpreter's dispatch chain
_OPS = list(Opcode)
_OPNUM = {op: i for i, op in enumerate(_OPS)}
_KIND_OF = {
    Opcode.MOV: "alu", Opcode.ADD: "alu", Opcode.SUB: "alu", Opcode.MUL: "alu", Opcode.MIN: "alu",
    Opcode.ALLOC: "alu", Opcode.BLT: "branch", Opcode.BGE: "branch", Opcode.BEQ: "branch",
    Opcode.BNE: "branch", Opcode.JMP: "branch", Opcode.LDNBR: "load", Opcode.LDBND: "load",
    Opcode.LDK: "load",
}
_REDUCE = {"MAC": 0, "MAX": 1, "MIN": 2}


@dataclass
class Execution:
    regs: list[int]
    trace: list[TraceEvent] | None
    steps: int
    stream_high_water: int
    warnings: list[str] = field(default_factory=list)

    @property
    def result(self) -> int:
        return self.regs[3]


class _Bundle:
    __slots__ = ("count", "kinds", "loads", "src", "dst", "pc", "deps")

    def __init__(self) -> None:
        self.count = 0
        self.kinds: set[str] = set()
        self.loads: list[int] = []
        self.src: set[int] = set()
        self.dst: set[int] = set()
        self.pc = -1
        # register written in the bundle -> (registers from outside the bundle it depends on,
        #                                     load addresses on its dependence chain)
        self.deps: dict[int, tuple[frozenset[int], tuple[int, ...]]] = {}


def _decode(program: Program):
    code = []
    for ins in program.instructions:
        ops = []
        for role, arg in zip(SIGNATURES[ins.op], ins.args):
            if isinstance(arg, Reg):
                ops.append((True, arg.index))
            elif isinstance(arg, Imm):
                ops.append((False, arg.value))
            elif role == "l":
                ops.append((False, program.labels[arg.name]))
            else:
                assert isinstance(arg, Sym)
                ops.append((False, _REDUCE.get(arg.name, arg.name)))
        code.append((_OPNUM[ins.op], ins.op, tuple(ops)))
    return code


class Machine:
    """Functional executor. One instance per thread; reusable across programs."""

    def __init__(self, memory: Memory | None = None, *, n_stream_regs: int = DEFAULT_STREAM_REGS):
        self.memory = memory if memory is not None else Memory()
        self.n_stream_regs = n_stream_regs
        self.regs = [0] * 32
        self.streams = StreamTable(n_stream_regs)
        self._csr: tuple[int, int, int] | None = None
        self._csr_arrays = None
        self._buffers: dict[int, tuple[int, np.ndarray]] = {}
        self._out_base = 0
        self._out_stride = 0
        self.steps = 0
        self._seq = 0

    # -- helpers ----------------------------------------------------------
    def _csr_view(self):
        if self._csr is None:
            raise MachineError("CSR registers are not set (missing S_CSR)")
        if self._csr_arrays is None:
            idx_addr, edges_addr, off_addr = self._csr
            index = self.memory.array_at(idx_addr)
            edges = self.memory.array_at(edges_addr)
            offs = self.memory.array_at(off_addr)
            starts = index[0::2].astype(np.int64)
            lens = index[1::2].astype(np.int64)
            indptr = np.zeros(len(starts) + 1, dtype=np.int64)
            if len(starts):
                indptr[:-1] = starts
                indptr[-1] = starts[-1] + lens[-1]
            self._csr_arrays = (indptr, edges, offs)
        return self._csr_arrays

    def _out_addr(self, reg: int) -> int:
        if not self._out_stride:
            self._out_stride = 1 << 20
            self._out_base = self.memory.reserve(self._out_stride * self.n_stream_regs)
        return self._out_base + reg * self._out_stride

    def _buffer(self, pc: int, n: int) -> int:
        held = self._buffers.get(pc)
        if held is None or len(held[1]) < n:
            arr = np.zeros(max(n, 1), dtype=np.uint32)
            held = (self.memory.place(arr, f"buf@{pc}"), arr)
            self._buffers[pc] = held
        return held[0]

    def _write_keys(self, addr: int, keys: np.ndarray) -> None:
        if len(keys) == 0:
            return
        base, arr, _ = self.memory.region(addr)
        off = (addr - base) // KEY_BYTES
        if off + len(keys) > len(arr):
            raise MemoryFault(f"scalar set-op output overflows buffer at {addr:#x}")
        arr[off : off + len(keys)] = keys

    # -- main loop ----------------------------------------------------------
    def run(self, program: Program, inputs: Mapping[int, int] | None = None, *, trace: bool = True,
            max_steps: int | None = None) -> Iterator[TraceEvent]:
        """Execute ``program`` and yield trace events as they are produced.

        ``inputs`` maps register numbers to initial values. When ``trace`` is
        False nothing is yielded but all architectural effects still happen.
        """
        R = self.regs
        for r, v in (inputs or {}).items():
            R[int(r)] = int(v)
        code = _decode(program)
        n_code = len(code)
        ST = self.streams
        mem = self.memory
        impl = K._impl
        seq = self._seq
        bundle = _Bundle() if trace else None
        pc = 0
        steps = 0
        limit = max_steps if max_steps is not None else -1

        def flush():
            nonlocal seq, bundle
            if bundle is None or bundle.count == 0:
                return None
            kinds = bundle.kinds
            kind = "load" if "load" in kinds else ("branch" if "branch" in kinds else "alu")
            ev = TraceEvent(
                seq, Opcode.SCALAR, bundle.pc, kind, bundle.count,
                tuple(sorted(bundle.src)), tuple(sorted(bundle.dst)),
                loads=tuple(bundle.loads),
                reg_deps=tuple(
                    (d, tuple(sorted(srcs)), lds) for d, (srcs, lds) in sorted(bundle.deps.items())
                ),
            )
            seq += 1
            self._seq = seq
            bundle = _Bundle()
            return ev

        def note(pc_, kind, src=(), dst=(), loads=(), count=1):
            b = bundle
            if b.count == 0:
                b.pc = pc_
            b.count += count
            b.kinds.add(kind)
            ext: set[int] = set()
            chain: tuple[int, ...] = tuple(loads)
            for r in src:
                inner = b.deps.get(r)
                if inner is None:
                    b.src.add(r)
                    ext.add(r)
                else:
                    ext |= inner[0]
                    chain += inner[1]
            for r in dst:
                b.deps[r] = (frozenset(ext), chain)
            b.dst.update(dst)
            b.loads.extend(loads)

        while pc < n_code:
            steps += 1
            if steps == limit:
                raise MachineError(f"step limit {max_steps} reached at pc {pc}")
            num, op, ops = code[pc]
            if op in _KIND_OF:
                # ---------------- scalar subset ----------------
                if op is Opcode.MOV:
                    (_, d), (k1, a) = ops
                    R[d] = R[a] if k1 else a
                    if bundle is not None:
                        note(pc, "alu", (a,) if k1 else (), (d,))
                    pc += 1
                elif op in (Opcode.ADD, Opcode.SUB, Opcode.MUL, Opcode.MIN):
                    (_, d), (k1, a), (k2, b) = ops
                    x = R[a] if k1 else a
                    y = R[b] if k2 else b
                    if op is Opcode.ADD:
                        R[d] = x + y
                    elif op is Opcode.SUB:
                        R[d] = x - y
                    elif op is Opcode.MUL:
                        R[d] = x * y
                    else:
                        R[d] = x if x < y else y
                    if bundle is not None:
                        note(pc, "alu", tuple(r for k, r in ((k1, a), (k2, b)) if k), (d,))
                    pc += 1
                elif op is Opcode.JMP:
                    if bundle is not None:
                        note(pc, "branch")
                    pc = ops[0][1]
                elif op is Opcode.LDNBR:
                    (_, da), (_, dl), (k1, a) = ops
                    v = R[a] if k1 else a
                    if self._csr is None:
                        raise MachineError("LDNBR before S_CSR")
                    ia = self._csr[0] + 8 * v
                    start = mem.word(ia)
                    R[dl] = mem.word(ia + 4)
                    R[da] = self._csr[1] + KEY_BYTES * start
                    if bundle is not None:
                        note(pc, "load", (a,) if k1 else (), (da, dl), (ia, ia + 4), count=2)
                    pc += 1
                elif op is Opcode.LDBND:
                    (_, d), (k1, a) = ops
                    v = R[a] if k1 else a
                    if self._csr is None:
                        raise MachineError("LDBND before S_CSR")
                    oa = self._csr[2] + KEY_BYTES * v
                    R[d] = mem.word(oa)
                    if bundle is not None:
                        note(pc, "load", (a,) if k1 else (), (d,), (oa,))
                    pc += 1
                elif op is Opcode.LDK:
                    (_, d), (k1, a), (k2, b) = ops
                    addr = (R[a] if k1 else a) + KEY_BYTES * (R[b] if k2 else b)
                    R[d] = mem.word(addr)
                    if bundle is not None:
                        note(pc, "load", tuple(r for k, r in ((k1, a), (k2, b)) if k), (d,), (addr,))
                    pc += 1
                elif op is Opcode.ALLOC:
                    (_, d), (k1, a) = ops
                    R[d] = self._buffer(pc, R[a] if k1 else a)
                    if bundle is not None:
                        note(pc, "alu", (a,) if k1 else (), (d,))
                    pc += 1
                else:  # conditional branches
                    (k1, a), (k2, b), (_, target) = ops
                    x = R[a] if k1 else a
                    y = R[b] if k2 else b
                    if op is Opcode.BLT:
                        taken = x < y
                    elif op is Opcode.BGE:
                        taken = x >= y
                    elif op is Opcode.BEQ:
                        taken = x == y
                    else:
                        taken = x != y
                    if bundle is not None:
                        note(pc, "branch", tuple(r for k, r in ((k1, a), (k2, b)) if k))
                    pc = target if taken else pc + 1
                if bundle is not None and bundle.count >= _BUNDLE_CAP:
                    ev = flush()
                    if ev is not None:
                        yield ev
                continue

            if op is Opcode.HALT:
                break
            if op is Opcode.SCALAR:
                (_, kind), (k1, c) = ops
                if bundle is not None:
                    note(pc, kind, (c,) if k1 else (), count=max(1, R[c] if k1 else c))
                pc += 1
                continue

            # ---------------- stream instructions and scalar set ops ----------------
            if bundle is not None:
                ev = flush()
                if ev is not None:
                    yield ev
            src = tuple(v for k, v in ops if k)
            event = None

            if op is Opcode.S_READ or op is Opcode.S_VREAD:
                (k1, a), (k2, n), (k3, s) = ops[:3]
                addr = R[a] if k1 else a
                length = R[n] if k2 else n
                sid = R[s] if k3 else s
                keys = mem.keys(addr, length)
                if op is Opcode.S_VREAD:
                    k4, va = ops[3]
                    vaddr = R[va] if k4 else va
                    ST.define(sid, keys, addr, kind="kv", vaddr=vaddr, producer=seq)
                else:
                    ST.define(sid, keys, addr, producer=seq)
                if trace:
                    event = TraceEvent(seq, op, pc, src_regs=src, sid_out=sid, out_len=length,
                                       key_ranges=((addr, length),), out_addr=addr)

            elif op is Opcode.S_FREE:
                k1, s = ops[0]
                sid = R[s] if k1 else s
                ST.free(sid)
                if trace:
                    event = TraceEvent(seq, op, pc, src_regs=src, sids_in=(sid,))

            elif op is Opcode.S_FETCH:
                (k1, s), (k2, o), (_, d) = ops
                sid = R[s] if k1 else s
                off = R[o] if k2 else o
                e = ST.get(sid)
                if off < 0:
                    raise MachineError(f"S_FETCH with negative offset {off}")
                R[d] = int(e.keys[off]) if off < len(e.keys) else EOS
                if trace:
                    event = TraceEvent(seq, op, pc, src_regs=src, dst_regs=(d,), sids_in=(sid,),
                                       deps=(e.producer,), in_lens=(len(e.keys),), result=R[d],
                                       key_ranges=((e.addr + KEY_BYTES * off, 1),))

            elif op in (Opcode.S_INTER, Opcode.S_INTER_C, Opcode.S_SUB, Opcode.S_SUB_C):
                (k1, a), (k2, b), (k3, o) = ops[:3]
                sa = R[a] if k1 else a
                sb = R[b] if k2 else b
                bound = -1
                if len(ops) == 4:
                    k4, bd = ops[3]
                    bound = R[bd] if k4 else bd
                ea = ST.get(sa)
                eb = ST.get(sb)
                lim = K.limit_of(bound)
                counting = op is Opcode.S_INTER_C or op is Opcode.S_SUB_C
                fn = impl.intersect if op is Opcode.S_INTER or op is Opcode.S_INTER_C else impl.subtract
                out, cnt, comps, ra, rb = fn(ea.keys, eb.keys, lim, not counting)
                if counting:
                    R[o] = cnt
                    dst, sid_out, out_addr = (o,), None, 0
                else:
                    sid_out = R[o] if k3 else o
                    # the output register is claimed (or remapped) before the address is known
                    entry = ST.define(sid_out, out, 0, producer=seq)
                    out_addr = self._out_addr(entry.reg)
                    entry.addr = out_addr
                    dst = ()
                if trace:
                    event = TraceEvent(
                        seq, op, pc, src_regs=src, dst_regs=dst, sids_in=(sa, sb), sid_out=sid_out,
                        deps=(ea.producer, eb.producer), in_lens=(len(ea.keys), len(eb.keys)),
                        out_len=cnt, reads=(ra, rb), comparisons=comps, bound=bound,
                        key_ranges=((ea.addr, len(ea.keys)), (eb.addr, len(eb.keys))),
                        out_addr=out_addr, result=cnt if counting else None,
                    )

            elif op is Opcode.S_VINTER:
                (k1, a), (k2, b), (_, d), (_, rop) = ops
                sa = R[a] if k1 else a
                sb = R[b] if k2 else b
                ea = ST.get(sa)
                eb = ST.get(sb)
                for e in (ea, eb):
                    if e.kind != "kv":
                        raise StreamKindError(f"S_VINTER on stream {e.sid}, which has no values")
                va = mem.values(ea.vaddr, len(ea.keys))
                vb = mem.values(eb.vaddr, len(eb.keys))
                acc, m, comps, ra, rb, ia, ib = impl.vinter(ea.keys, va, eb.keys, vb, int(rop))
                R[d] = float(acc)
                if trace:
                    vloads = tuple(
                        (ea.vaddr + VALUE_BYTES * int(i), eb.vaddr + VALUE_BYTES * int(j))
                        for i, j in zip(ia.tolist(), ib.tolist())
                    )
                    event = TraceEvent(
                        seq, op, pc, src_regs=src, dst_regs=(d,), sids_in=(sa, sb),
                        deps=(ea.producer, eb.producer), in_lens=(len(ea.keys), len(eb.keys)),
                        out_len=m, reads=(ra, rb), comparisons=comps,
                        key_ranges=((ea.addr, len(ea.keys)), (eb.addr, len(eb.keys))),
                        value_loads=vloads, result=float(acc), kind=("MAC", "MAX", "MIN")[int(rop)],
                    )

            elif op is Opcode.S_CSR:
                vals = tuple(R[v] if k else v for k, v in ops)
                self._csr = vals  # type: ignore[assignment]
                self._csr_arrays = None
                if trace:
                    event = TraceEvent(seq, op, pc, src_regs=src)

            elif op is Opcode.S_NESTINTER:
                (k1, s), (_, d) = ops
                sid = R[s] if k1 else s
                e = ST.get(sid)
                indptr, edges, offs = self._csr_view()
                res = K.nested_from_arrays(e.keys, indptr, edges, offs)
                R[d] = res.total
                if trace:
                    idx_addr, edges_addr, off_addr = self._csr  # type: ignore[misc]
                    verts = e.keys.tolist()
                    nested = tuple(
                        NestedElement(
                            v,
                            (idx_addr + 8 * v, off_addr + KEY_BYTES * v),
                            edges_addr + KEY_BYTES * int(indptr[v]),
                            pl, c, k, rs, rp,
                        )
                        for v, pl, c, k, rs, rp in zip(
                            verts, res.prefix_lengths.tolist(), res.counts.tolist(),
                            res.comparisons.tolist(), res.reads_s.tolist(), res.reads_prefix.tolist(),
                        )
                    )
                    event = TraceEvent(seq, op, pc, src_regs=src, dst_regs=(d,), sids_in=(sid,),
                                       deps=(e.producer,), in_lens=(len(e.keys),), out_len=res.total,
                                       comparisons=int(res.comparisons.sum()),
                                       key_ranges=((e.addr, len(e.keys)),), nested=nested,
                                       result=res.total)

            else:  # XINTER / XSUB and their counting forms: scalar fallback set operations
                counting = op is Opcode.XINTER_C or op is Opcode.XSUB_C
                vals = [R[v] if k else v for k, v in ops[1:]]
                d = ops[0][1]
                if counting:
                    a_addr, a_len, b_addr, b_len, bound = vals
                    out_addr = 0
                else:
                    a_addr, a_len, b_addr, b_len, out_addr, bound = vals
                fn = impl.intersect if op in (Opcode.XINTER, Opcode.XINTER_C) else impl.subtract
                ka = mem.keys(a_addr, a_len)
                kb = mem.keys(b_addr, b_len)
                out, cnt, comps, ra, rb = fn(ka, kb, K.limit_of(bound), not counting)
                if not counting:
                    self._write_keys(out_addr, out)
                R[d] = cnt
                if trace:
                    event = TraceEvent(
                        seq, Opcode.SCALAR, pc, "setop", max(1, comps), src, (d,),
                        in_lens=(a_len, b_len), out_len=cnt, reads=(ra, rb), comparisons=comps,
                        bound=bound, key_ranges=((a_addr, a_len), (b_addr, b_len)), out_addr=out_addr,
                    )

            pc += 1
            if event is not None:
                seq += 1
                self._seq = seq
                yield event

        self.steps += steps
        if bundle is not None:
            ev = flush()
            if ev is not None:
                yield ev
        self._seq = seq

    def execute(self, program: Program, inputs: Mapping[int, int] | None = None, *, trace: bool = True,
                max_steps: int | None = None) -> Execution:
        events = list(self.run(program, inputs, trace=trace, max_steps=max_steps))
        return Execution(list(self.regs), events if trace else None, self.steps,
                         self.streams.high_water, list(program.warnings))


def execute(program: Program, graph: Graph | None = None, inputs: Mapping[int, int] | None = None, *,
            trace: bool = True, n_stream_regs: int = DEFAULT_STREAM_REGS, memory: Memory | None = None,
            max_steps: int | None = None) -> Execution:
    """Run ``program`` on a fresh machine.

    With a graph, its CSR arrays are placed in memory and registers r4/r5/r6
    receive the index, edge and bound-offset addresses; r1/r2 default to the
    vertex range ``[0, n)``. Explicit ``inputs`` override those defaults.
    """
    m = Machine(memory, n_stream_regs=n_stream_regs)
    regs: dict[int, int] = {}
    if graph is not None:
        lay = place_graph(m.memory, graph)
        regs.update({1: 0, 2: graph.num_vertices, 4: lay.index_addr, 5: lay.edges_addr, 6: lay.offset_addr})
    regs.update(inputs or {})
    return m.execute(program, regs, trace=trace, max_steps=max_steps)
