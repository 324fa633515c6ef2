"""Low-level vertex-set and vector programming interface.

Each call issues the corresponding stream instruction on an internal
:class:`Machine`, so hand-written applications produce the same traces as
compiled ones. Handles are plain stream IDs.
"""
from __future__ import annotations

import numpy as np

from ..graph import EOS, Graph
from .instructions import Imm, Instruction, Opcode, Program, Reg, Sym
from .machine import Machine, Memory, place_graph
from .trace import TraceEvent

__all__ = ["StreamAPI", "VertexSet", "Vector"]

VertexSet = int
Vector = int
_SCRATCH = Reg(31)


class StreamAPI:
    def __init__(self, graph: Graph | None = None, *, n_stream_regs: int = 16, trace: bool = True,
                 memory: Memory | None = None):
        self.machine = Machine(memory, n_stream_regs=n_stream_regs)
        self.memory = self.machine.memory
        self.graph = graph
        self.trace_enabled = trace
        self.trace: list[TraceEvent] = []
        self._free_ids: list[int] = []
        self._next_id = 0
        self.layout = None
        if graph is not None:
            self.layout = place_graph(self.memory, graph)
            self._issue(Opcode.S_CSR, Imm(self.layout.index_addr), Imm(self.layout.edges_addr),
                        Imm(self.layout.offset_addr))

    # -- plumbing -----------------------------------------------------------
    def _issue(self, op: Opcode, *args) -> int:
        prog = Program((Instruction(op, tuple(args)),))
        self.trace.extend(self.machine.run(prog, trace=self.trace_enabled))
        return self.machine.regs[31]

    def _new_id(self) -> int:
        if self._free_ids:
            return self._free_ids.pop()
        self._next_id += 1
        return self._next_id - 1

    def _retire_id(self, sid: int) -> None:
        self._free_ids.append(sid)

    @staticmethod
    def _bound(bound: int | None) -> Imm:
        return Imm(-1 if bound is None else int(bound))

    # -- vertex sets ----------------------------------------------------------
    def register_vertex_set(self, addr: int, length: int) -> VertexSet:
        sid = self._new_id()
        self._issue(Opcode.S_READ, Imm(addr), Imm(length), Imm(sid))
        return sid

    def register_keys(self, keys) -> VertexSet:
        """Copy ``keys`` into memory and register them as a vertex set."""
        arr = np.ascontiguousarray(keys, dtype=np.uint32)
        if len(arr) == 0:
            return self.register_vertex_set(0, 0)
        return self.register_vertex_set(self.memory.place(arr, "keys"), len(arr))

    def neighbor_set(self, v: int, *, below_self: bool = False) -> VertexSet:
        """Register ``N(v)``, or only its neighbors smaller than ``v``."""
        if self.graph is None or self.layout is None:
            raise RuntimeError("no graph attached")
        start, length = (int(x) for x in self.graph.csr_index[v])
        if below_self:
            length = int(self.graph.csr_bound_offset[v])
        return self.register_vertex_set(self.layout.edges_addr + 4 * start, length)

    def release_vertex_set(self, h: VertexSet) -> None:
        self._issue(Opcode.S_FREE, Imm(h))
        self._retire_id(h)

    def nest_counting(self, h: VertexSet) -> int:
        return self._issue(Opcode.S_NESTINTER, Imm(h), _SCRATCH)

    def enumerate_vertex_set(self, h: VertexSet, offset: int) -> int:
        """Element at ``offset``, or ``EOS`` past the end."""
        return self._issue(Opcode.S_FETCH, Imm(h), Imm(offset), _SCRATCH)

    def elements(self, h: VertexSet) -> list[int]:
        out = []
        i = 0
        while True:
            x = self.enumerate_vertex_set(h, i)
            if x == EOS:
                return out
            out.append(x)
            i += 1

    def subtract_vertex_set(self, a: VertexSet, b: VertexSet, c: VertexSet | None = None,
                            bound: int | None = None) -> VertexSet:
        c = self._new_id() if c is None else c
        self._issue(Opcode.S_SUB, Imm(a), Imm(b), Imm(c), self._bound(bound))
        return c

    def subtract_vertex_set_count(self, a: VertexSet, b: VertexSet, bound: int | None = None) -> int:
        return self._issue(Opcode.S_SUB_C, Imm(a), Imm(b), _SCRATCH, self._bound(bound))

    def intersect_vertex_set(self, a: VertexSet, b: VertexSet, c: VertexSet | None = None,
                             bound: int | None = None) -> VertexSet:
        c = self._new_id() if c is None else c
        self._issue(Opcode.S_INTER, Imm(a), Imm(b), Imm(c), self._bound(bound))
        return c

    def intersect_vertex_set_count(self, a: VertexSet, b: VertexSet, bound: int | None = None) -> int:
        return self._issue(Opcode.S_INTER_C, Imm(a), Imm(b), _SCRATCH, self._bound(bound))

    # -- vectors ----------------------------------------------------------------
    def register_vector(self, index_addr: int, value_addr: int, length: int) -> Vector:
        sid = self._new_id()
        self._issue(Opcode.S_VREAD, Imm(index_addr), Imm(length), Imm(sid), Imm(value_addr))
        return sid

    def register_vector_arrays(self, keys, values) -> Vector:
        k = np.ascontiguousarray(keys, dtype=np.uint32)
        v = np.ascontiguousarray(values, dtype=np.float64)
        if len(k) != len(v):
            raise ValueError("keys and values differ in length")
        if len(k) == 0:
            return self.register_vector(0, 0, 0)
        return self.register_vector(self.memory.place(k, "vkeys"), self.memory.place(v, "vvals"), len(k))

    def release_vector(self, h: Vector) -> None:
        self.release_vertex_set(h)

    def vector_compute(self, a: Vector, b: Vector, op: str = "MAC") -> float:
        return float(self._issue(Opcode.S_VINTER, Imm(a), Imm(b), _SCRATCH, Sym(op.upper())))
