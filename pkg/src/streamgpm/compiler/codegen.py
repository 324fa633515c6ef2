"""Lower a :class:`Schedule` to a stream-ISA program.

Calling convention of generated programs:

====  =====================================================
r1    first level-0 vertex (inclusive)
r2    last level-0 vertex (exclusive)
r3    embedding count (output)
r4    CSR index address (``(start, length)`` per vertex)
r5    CSR edge array address
r6    CSR bound-offset array address
r7    vertex label array address (labeled patterns only)
====  =====================================================

Stream IDs are compile-time constants handed out by a
:class:`StreamAllocator`; a level's stream stays live for the duration of its
loop and temporaries are freed right after their last use. When the
allocator runs dry, the affected level is rebuilt with scalar set operations
over memory buffers and a warning is attached to the program.
"""
from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass, field

from ..graph import EOS
from ..isa.instructions import Program, assemble
from .schedule import Level, Schedule

__all__ = ["CodegenOptions", "StreamAllocator", "FallbackWarning", "codegen", "nested_eligible"]


class FallbackWarning(UserWarning):
    """A level could not get enough stream registers and uses scalar set operations."""


@dataclass(frozen=True)
class CodegenOptions:
    nested: bool = True
    hoist: bool = True
    reuse: bool = True
    n_regs: int = 16


class StreamAllocator:
    """Compile-time stream-ID allocator over ``n_regs`` stream registers."""

    def __init__(self, n_regs: int = 16):
        self.n_regs = n_regs
        self._free = list(range(n_regs - 1, -1, -1))
        self.live: set[int] = set()
        self.high_water = 0

    def alloc(self) -> int | None:
        if not self._free:
            return None
        sid = self._free.pop()
        self.live.add(sid)
        self.high_water = max(self.high_water, len(self.live))
        return sid

    def free(self, sid: int) -> None:
        if sid not in self.live:
            raise ValueError(f"stream {sid} is not allocated")
        self.live.remove(sid)
        self._free.append(sid)

    def snapshot(self):
        return list(self._free), set(self.live), self.high_water

    def restore(self, snap) -> None:
        free, live, hw = snap
        self._free, self.live, self.high_water = list(free), set(live), hw


class _OutOfStreams(Exception):
    pass


class _OutOfRegisters(RuntimeError):
    pass


# scalar registers available to generated code (r0 stays zero, r31 is the API scratch)
_REG_POOL = tuple(range(8, 31))


@dataclass
class _Src:
    """Where a level's candidate set lives while its loop runs."""

    kind: str  # "stream" or "buffer"
    sid: int = -1
    addr: str = ""
    length: str = ""


@dataclass
class _Ctx:
    lines: list[str] = field(default_factory=list)
    free_regs: list[int] = field(default_factory=lambda: list(reversed(_REG_POOL)))
    label_id: int = 0
    warnings: list[str] = field(default_factory=list)

    def emit(self, text: str) -> None:
        self.lines.append("    " + text)

    def label(self, name: str) -> None:
        self.lines.append(f"{name}:")

    def comment(self, text: str) -> None:
        self.lines.append(f"    ; {text}")

    def new_label(self, stem: str) -> str:
        self.label_id += 1
        return f"{stem}_{self.label_id}"

    def reg(self) -> str:
        if not self.free_regs:
            raise _OutOfRegisters("generated code needs more than the available scalar registers")
        return f"r{self.free_regs.pop()}"

    def release(self, *regs: str) -> None:
        for r in regs:
            self.free_regs.append(int(r[1:]))

    def snapshot(self):
        return len(self.lines), list(self.free_regs), self.label_id

    def restore(self, snap) -> None:
        n, regs, lid = snap
        del self.lines[n:]
        self.free_regs = list(regs)
        self.label_id = lid


def _tightest(lv: Level, closure: frozenset[tuple[int, int]]) -> int | None:
    """The upper-bound level that is provably the smallest, if one exists."""
    for u in lv.upper:
        if all(w == u or (u, w) in closure for w in lv.upper):
            return u
    return None


def _needs_loop(lv: Level) -> bool:
    """Candidates must be visited one by one (a filter cannot be folded into a count)."""
    return bool(lv.dynamic or lv.lower or lv.label is not None)


def _has_filters(lv: Level) -> bool:
    return bool(lv.dynamic or lv.lower or lv.static_included or lv.label is not None)


def nested_eligible(s: Schedule) -> bool:
    """Whether the two innermost levels collapse into one S_NESTINTER."""
    k = s.k
    if k < 3:
        return False
    inner, outer = s.levels[k - 1], s.levels[k - 2]
    if set(inner.intersect) != set(outer.intersect) | {k - 2}:
        return False
    if set(inner.subtract) != set(outer.subtract):
        return False
    from .pattern import restriction_closure

    closure = restriction_closure(s.restrictions)
    if _tightest(inner, closure) != k - 2:
        return False
    return not _has_filters(inner) and not _has_filters(outer)


def _hoistable(s: Schedule) -> bool:
    k = s.k
    if k < 3:
        return False
    inner = s.levels[k - 1]
    return (k - 2) not in inner.depends_on and not _needs_loop(inner)


class _Gen:
    def __init__(self, s: Schedule, opts: CodegenOptions):
        from .pattern import restriction_closure

        self.s = s
        self.opts = opts
        self.closure = restriction_closure(s.restrictions)
        self.ctx = _Ctx()
        self.alloc = StreamAllocator(opts.n_regs)
        self.vreg: dict[int, str] = {}
        self.src: dict[int, _Src] = {}
        self.fallback_levels: list[int] = []
        self.nested_used = False
        self.hoist_used = False

    # -- helpers ---------------------------------------------------------------
    def _sid(self) -> int:
        sid = self.alloc.alloc()
        if sid is None:
            raise _OutOfStreams
        return sid

    def _free_sid(self, sid: int) -> None:
        self.ctx.emit(f"S_FREE {sid}")
        self.alloc.free(sid)

    def _bound(self, lv: Level) -> tuple[str, list[str], int | None]:
        """Bound operand text, temp registers to release, and the tightest level (if any)."""
        if not lv.upper:
            return "-1", [], None
        t = _tightest(lv, self.closure)
        if t is not None:
            return self.vreg[t], [], t
        r = self.ctx.reg()
        self.ctx.emit(f"MIN {r}, {self.vreg[lv.upper[0]]}, {self.vreg[lv.upper[1]]}")
        for u in lv.upper[2:]:
            self.ctx.emit(f"MIN {r}, {r}, {self.vreg[u]}")
        return r, [r], None

    def _load_list(self, x: int, prefix: bool) -> tuple[str, str]:
        """Registers holding (address, length) of N(v_x), or its part below v_x."""
        ra, rl = self.ctx.reg(), self.ctx.reg()
        self.ctx.emit(f"LDNBR {ra}, {rl}, {self.vreg[x]}")
        if prefix:
            self.ctx.emit(f"LDBND {rl}, {self.vreg[x]}")
        return ra, rl

    def _read(self, x: int, prefix: bool) -> int:
        ra, rl = self._load_list(x, prefix)
        sid = self._sid()
        self.ctx.emit(f"S_READ {ra}, {rl}, {sid}")
        self.ctx.release(ra, rl)
        return sid

    def _reuse_base(self, lv: Level, below: int) -> int | None:
        if not self.opts.reuse:
            return None
        best = None
        for i in range(1, min(lv.index, below)):
            src = self.src.get(i)
            if src is None or src.kind != "stream":
                continue
            other = self.s.levels[i]
            if not set(other.intersect) <= set(lv.intersect) or not set(other.subtract) <= set(lv.subtract):
                continue
            if not all(any(w == u or (w, u) in self.closure for w in lv.upper) for u in other.upper):
                continue
            best = i
        return best

    # -- set construction --------------------------------------------------------
    def _build(self, lv: Level, mode: str, below: int) -> tuple[str, object]:
        """Materialize the level's set.

        ``mode`` is ``"stream"`` (returns ``("stream", sid)``) or ``"count"``
        (returns ``("count", reg)`` holding the raw set size). Falls back to
        buffers when stream IDs run out.
        """
        snap_ctx, snap_alloc = self.ctx.snapshot(), self.alloc.snapshot()
        try:
            return self._build_streams(lv, mode, below)
        except _OutOfStreams:
            self.ctx.restore(snap_ctx)
            self.alloc.restore(snap_alloc)
            msg = (f"level {lv.index}: stream registers exhausted ({self.opts.n_regs}); "
                   "falling back to scalar set operations")
            self.ctx.warnings.append(msg)
            self.fallback_levels.append(lv.index)
            _warnings.warn(msg, FallbackWarning, stacklevel=4)
            return self._build_buffers(lv, mode)

    def _build_streams(self, lv: Level, mode: str, below: int):
        ctx = self.ctx
        bound, tmp, tight = self._bound(lv)
        base = self._reuse_base(lv, below)
        if mode == "count" and len(lv.intersect) == 1 and not lv.subtract:
            x = lv.intersect[0]
            if not lv.upper or x == tight:
                # the size is a neighbor-list length (or its bounded prefix): no stream needed
                base = None
        ops: list[tuple[str, int]]
        if base is not None:
            b = self.s.levels[base]
            ops = [("I", a) for a in lv.intersect if a not in b.intersect]
            ops += [("S", x) for x in lv.subtract if x not in b.subtract]
            cur, owned = self.src[base].sid, False
            satisfied = not lv.upper or (tight is not None and _tightest(b, self.closure) == tight)
        else:
            ops = [("I", a) for a in lv.intersect] + [("S", x) for x in lv.subtract]
            first = ops.pop(0)[1]
            prefix = first in lv.upper
            satisfied = not lv.upper or (prefix and first == tight)
            if mode == "count" and not ops and satisfied:
                ra, rl = self._load_list(first, prefix)
                ctx.release(ra, *tmp)
                return "count", rl
            cur, owned = self._read(first, prefix), True

        if not ops:
            if satisfied and mode == "stream":
                if owned:
                    ctx.release(*tmp)
                    return "stream", cur
            if mode == "count":
                rc = ctx.reg()
                ctx.emit(f"S_INTER.C {cur}, {cur}, {rc}, {bound}")
                if owned:
                    self._free_sid(cur)
                ctx.release(*tmp)
                return "count", rc
            out = self._sid()
            ctx.emit(f"S_INTER {cur}, {cur}, {out}, {bound}")
            if owned:
                self._free_sid(cur)
            ctx.release(*tmp)
            return "stream", out

        for n, (kind, x) in enumerate(ops):
            last = n == len(ops) - 1
            t = self._read(x, x in lv.upper)
            opname = "S_INTER" if kind == "I" else "S_SUB"
            if last and mode == "count":
                rc = ctx.reg()
                ctx.emit(f"{opname}.C {cur}, {t}, {rc}, {bound}")
                self._free_sid(t)
                if owned:
                    self._free_sid(cur)
                ctx.release(*tmp)
                return "count", rc
            out = self._sid()
            ctx.emit(f"{opname} {cur}, {t}, {out}, {bound}")
            self._free_sid(t)
            if owned:
                self._free_sid(cur)
            cur, owned = out, True
        ctx.release(*tmp)
        return "stream", cur

    def _build_buffers(self, lv: Level, mode: str):
        ctx = self.ctx
        bound, tmp, tight = self._bound(lv)
        ops = [("I", a) for a in lv.intersect] + [("S", x) for x in lv.subtract]
        first = ops.pop(0)[1]
        prefix = first in lv.upper
        ca, cl = self._load_list(first, prefix)
        satisfied = not lv.upper or (prefix and first == tight)
        if not ops and not satisfied:
            ops = [("T", first)]
        for n, (kind, x) in enumerate(ops):
            last = n == len(ops) - 1
            if kind == "T":
                ta, tl = ca, cl
            else:
                ta, tl = self._load_list(x, x in lv.upper)
            opname = "XSUB" if kind == "S" else "XINTER"
            if last and mode == "count":
                rc = ctx.reg()
                ctx.emit(f"{opname}.C {rc}, {ca}, {cl}, {ta}, {tl}, {bound}")
                if kind != "T":
                    ctx.release(ta, tl)
                ctx.release(ca, cl, *tmp)
                return "count", rc
            buf, nl = ctx.reg(), ctx.reg()
            ctx.emit(f"ALLOC {buf}, {cl}")
            ctx.emit(f"{opname} {nl}, {ca}, {cl}, {ta}, {tl}, {buf}, {bound}")
            if kind != "T":
                ctx.release(ta, tl)
            ctx.release(ca, cl)
            ca, cl = buf, nl
        ctx.release(*tmp)
        if mode == "count":
            ctx.release(ca)
            return "count", cl
        return "buffer", (ca, cl)

    # -- loops -------------------------------------------------------------------
    def _filters(self, lv: Level, vj: str, skip: str) -> None:
        ctx = self.ctx
        for i in lv.static_included + lv.dynamic:
            ctx.emit(f"BEQ {vj}, {self.vreg[i]}, {skip}")
        for lo in lv.lower:
            ctx.emit(f"BGE {self.vreg[lo]}, {vj}, {skip}")
        if lv.label is not None:
            rl = ctx.reg()
            ctx.emit(f"LDK {rl}, r7, {vj}")
            ctx.emit(f"BNE {rl}, {lv.label}, {skip}")
            ctx.release(rl)

    def _loop(self, lv: Level, built, body) -> None:
        """Iterate the level's candidates, run ``body`` for each, then release the set."""
        ctx = self.ctx
        kind, h = built
        vj, ri = ctx.reg(), ctx.reg()
        self.vreg[lv.index] = vj
        head, end = ctx.new_label(f"L{lv.index}"), ctx.new_label(f"L{lv.index}_end")
        ctx.emit(f"MOV {ri}, 0")
        ctx.label(head)
        if kind == "stream":
            self.src[lv.index] = _Src("stream", sid=h)
            ctx.emit(f"S_FETCH {h}, {ri}, {vj}")
            ctx.emit(f"ADD {ri}, {ri}, 1")
            ctx.emit(f"BEQ {vj}, {EOS}, {end}")
        else:
            ba, bl = h
            self.src[lv.index] = _Src("buffer", addr=ba, length=bl)
            ctx.emit(f"BGE {ri}, {bl}, {end}")
            ctx.emit(f"LDK {vj}, {ba}, {ri}")
            ctx.emit(f"ADD {ri}, {ri}, 1")
        self._filters(lv, vj, head)
        body()
        ctx.emit(f"JMP {head}")
        ctx.label(end)
        if kind == "stream":
            self._free_sid(h)
        else:
            ctx.release(*h)
        del self.src[lv.index]
        del self.vreg[lv.index]
        ctx.release(vj, ri)

    # -- levels --------------------------------------------------------------------
    def _count_inner(self, lv: Level, below: int) -> str | None:
        """Register with the level's filtered candidate count, or None if it needs a loop."""
        if _needs_loop(lv):
            return None
        _, rc = self._build(lv, "count", below)
        if lv.static_included:
            self.ctx.emit(f"SUB {rc}, {rc}, {len(lv.static_included)}")
        return rc

    def _add_per_candidate(self, lv: Level, amount: str) -> None:
        built = self._build(lv, "stream", lv.index)
        self._loop(lv, built, lambda: self.ctx.emit(f"ADD r3, r3, {amount}"))

    def level(self, j: int) -> None:
        s, ctx = self.s, self.ctx
        lv = s.levels[j]
        k = s.k
        ctx.comment(f"level {j}: {lv.formula()}")
        if j == k - 1:
            rc = self._count_inner(lv, j)
            if rc is None:
                self._add_per_candidate(lv, "1")
            else:
                ctx.emit(f"ADD r3, r3, {rc}")
                ctx.release(rc)
            return
        if j == k - 2 and self.opts.nested and nested_eligible(s):
            self.nested_used = True
            _, sid = self._build(lv, "stream", j)
            if isinstance(sid, int):
                rc = ctx.reg()
                ctx.emit(f"S_NESTINTER {sid}, {rc}")
                self._free_sid(sid)
                ctx.emit(f"ADD r3, r3, {rc}")
                ctx.release(rc)
                return
            # fell back to buffers: enumerate normally over the buffer
            self._loop(lv, ("buffer", sid), lambda: self.level(j + 1))
            return
        if j == k - 2 and self.opts.hoist and _hoistable(s):
            self.hoist_used = True
            inner = s.levels[k - 1]
            ctx.comment(f"level {k - 1} does not depend on v{j}; its count is hoisted")
            rc_inner = self._count_inner(inner, j)
            assert rc_inner is not None
            if _needs_loop(lv):
                self._add_per_candidate(lv, rc_inner)
            else:
                rc = self._count_inner(lv, j)
                assert rc is not None
                ctx.emit(f"MUL {rc}, {rc}, {rc_inner}")
                ctx.emit(f"ADD r3, r3, {rc}")
                ctx.release(rc)
            ctx.release(rc_inner)
            return
        built = self._build(lv, "stream", j)
        self._loop(lv, built, lambda: self.level(j + 1))

    def program(self) -> Program:
        s, ctx = self.s, self.ctx
        ctx.comment(f"pattern {s.pattern}")
        ctx.comment(f"order {list(s.order)}; restrictions " +
                    ", ".join(f"v{i}<v{j}" for i, j in sorted(s.restrictions)))
        ctx.emit("S_CSR r4, r5, r6")
        ctx.emit("MOV r3, 0")
        v0 = ctx.reg()
        self.vreg[0] = v0
        head, nxt, end = ctx.new_label("L0"), ctx.new_label("L0_next"), ctx.new_label("L0_end")
        ctx.emit(f"MOV {v0}, r1")
        ctx.label(head)
        ctx.emit(f"BGE {v0}, r2, {end}")
        lv0 = s.levels[0]
        if lv0.label is not None:
            rl = ctx.reg()
            ctx.emit(f"LDK {rl}, r7, {v0}")
            ctx.emit(f"BNE {rl}, {lv0.label}, {nxt}")
            ctx.release(rl)
        if s.k == 1:
            ctx.emit("ADD r3, r3, 1")
        else:
            self.level(1)
        ctx.label(nxt)
        ctx.emit(f"ADD {v0}, {v0}, 1")
        ctx.emit(f"JMP {head}")
        ctx.label(end)
        ctx.emit("HALT")
        text = "\n".join(ctx.lines) + "\n"
        prog = assemble(text, name=s.pattern.name)
        return Program(prog.instructions, prog.labels, prog.name, tuple(ctx.warnings))


def codegen(s: Schedule, opts: CodegenOptions | None = None) -> Program:
    """Generate the stream-ISA program for a schedule."""
    gen = _Gen(s, opts or CodegenOptions())
    return gen.program()
