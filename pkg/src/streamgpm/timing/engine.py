"""Trace replay through the core model.

The engine walks the trace once, in program order, and computes for every
instruction its dispatch, start, completion and retire times against the
shared resources (reorder buffer, stream registers, intersection units,
the stream-cache port, the load queue, caches and memory controllers).
Each resource is a reservation timeline rather than a per-cycle state
machine, so the cost of a replay is proportional to the trace length and
not to the simulated cycle count.
"""
from __future__ import annotations

import heapq
from collections import deque
from typing import Iterable

from ..isa.instructions import Opcode
from ..isa.machine import KEY_BYTES
from ..isa.trace import TraceEvent, stream_length_histogram
from .cache import MemorySystem
from .config import ConfigError, SimConfig, SimStats

__all__ = ["SimulationError", "simulate", "breakdown"]

_S_READ = Opcode.S_READ
_S_VREAD = Opcode.S_VREAD
_S_FREE = Opcode.S_FREE
_S_FETCH = Opcode.S_FETCH
_S_INTER = Opcode.S_INTER
_S_INTER_C = Opcode.S_INTER_C
_S_SUB = Opcode.S_SUB
_S_SUB_C = Opcode.S_SUB_C
_S_VINTER = Opcode.S_VINTER
_S_CSR = Opcode.S_CSR
_S_NEST = Opcode.S_NESTINTER
_SCALAR = Opcode.SCALAR


class SimulationError(RuntimeError):
    """The trace cannot be replayed (e.g. a stream is used before it is defined)."""


class _Stream:
    __slots__ = ("addr", "length", "ready", "slot", "evicted")

    def __init__(self, addr: int, length: int, ready: int, slot: int):
        self.addr = addr
        self.length = length
        self.ready = ready  # first slot usable (or producer finished)
        self.slot = slot  # index of the physical stream register
        self.evicted = False  # head of the stream left the slot after a long scan


class _Core:
    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.st = SimStats(
            iu_busy=[0] * cfg.n_ius, iu_compare=[0] * cfg.n_ius, iu_wait=[0] * cfg.n_ius, iu_ops=[0] * cfg.n_ius
        )
        self.mem = MemorySystem(cfg, self.st)
        self.rob: deque[tuple[int, int]] = deque()
        self.rob_occ = 0
        self.front = 0  # earliest dispatch time of the next instruction
        self.last_retire = 0
        self.reg_ready = [0] * 32
        self.streams: dict[int, _Stream] = {}
        self.free_regs: list[tuple[int, int]] = [(0, r) for r in range(cfg.n_stream_regs)]
        self.iu_free = [0] * cfg.n_ius
        self.port_free = 0
        self.spans: list[tuple[int, int]] = []  # intersection-active intervals
        self._tmp_sid = -1

    # -- pipeline bookkeeping ------------------------------------------------
    def dispatch(self, entries: int) -> int:
        cfg = self.cfg
        t = self.front
        rob = self.rob
        while rob and rob[0][0] <= t:
            self.rob_occ -= rob.popleft()[1]
        while self.rob_occ + entries > cfg.rob_size:
            rt, e = rob.popleft()
            if rt > t:
                self.st.rob_full_cycles += rt - t
                t = rt
            self.rob_occ -= e
        self.front = t + (entries + cfg.dispatch_width - 1) // cfg.dispatch_width
        self.st.instructions += entries
        return t

    def retire(self, done: int, entries: int) -> int:
        r = done if done > self.last_retire else self.last_retire
        self.last_retire = r
        self.rob.append((r, entries))
        self.rob_occ += entries
        if self.rob_occ > self.st.max_rob_occupancy:
            self.st.max_rob_occupancy = self.rob_occ
        return r

    def src_ready(self, regs, t: int) -> int:
        rr = self.reg_ready
        for r in regs:
            if rr[r] > t:
                t = rr[r]
        return t

    def acquire(self, sid: int) -> int:
        """Stream register for a definition of ``sid``; stalls dispatch until one is free."""
        old = self.streams.get(sid)
        if old is not None:
            return old.slot  # redefinition reuses the mapped register
        if not self.free_regs:
            raise SimulationError("all stream registers are live and none is ever freed")
        avail, slot = heapq.heappop(self.free_regs)
        if avail > self.front:
            self.st.stream_stall_cycles += avail - self.front
            self.front = avail
        return slot

    def release(self, sid: int, when: int) -> None:
        s = self.streams.pop(sid, None)
        if s is None:
            raise SimulationError(f"S_FREE of undefined stream {sid}")
        heapq.heappush(self.free_regs, (when, s.slot))

    def stream(self, sid: int) -> _Stream:
        s = self.streams.get(sid)
        if s is None:
            raise SimulationError(f"stream {sid} used before it was defined")
        return s

    # -- instruction classes ---------------------------------------------------
    def define_read(self, sid: int, addr: int, length: int, src) -> None:
        slot = self.acquire(sid)
        t = self.dispatch(1)
        start = self.src_ready(src, t)
        fill = self.mem.stream_fill(addr, min(length, self.cfg.slot_keys), start)
        if length:
            self.st.scache_fills += 1
        self.streams[sid] = _Stream(addr, length, fill, slot)
        self.retire(start + 1, 1)

    def free(self, sid: int) -> None:
        t = self.dispatch(1)
        r = self.retire(t + 1, 1)
        self.release(sid, r)

    def _head(self, s: _Stream, t: int) -> int:
        """Time the first slot of ``s`` is usable by an operation starting at ``t``."""
        if s.evicted:
            self.st.scache_refills += 1
            return self.mem.stream_fill(s.addr, min(s.length, self.cfg.slot_keys), t)
        return s.ready

    def _tail_stall(self, s: _Stream, reads: int, t: int) -> int:
        """Exposed refill latency for sub-slots past the first slot (one sub-slot prefetched ahead)."""
        cfg = self.cfg
        if reads <= cfg.slot_keys:
            return 0
        stall = 0
        sub = cfg.subslot_keys
        pos = cfg.slot_keys
        while pos < reads:
            n = min(sub, s.length - pos)
            issue = t + pos - sub
            lat = self.mem.stream_fill(s.addr + pos * cfg.key_bytes, n, issue) - issue
            self.st.scache_refills += 1
            if lat > sub:
                stall += lat - sub
            pos += sub
        s.evicted = True
        return stall

    def merge(self, t: int, ready: int, ins: tuple[_Stream, ...], reads, comps: int) -> tuple[int, int, int]:
        """Occupy an IU for one merge; returns ``(iu, start, end)``."""
        cfg = self.cfg
        iu_free = self.iu_free
        iu = min(range(len(iu_free)), key=iu_free.__getitem__)
        begin = ready
        for s in ins:
            h = self._head(s, ready)
            if h > begin:
                begin = h
        start = begin if begin > iu_free[iu] else iu_free[iu]
        stall = 0
        for s, r in zip(ins, reads):
            stall += self._tail_stall(s, r, start)
        keys = sum(reads)
        port = start if start > self.port_free else self.port_free
        port_cycles = -(-keys // cfg.s_cache_bandwidth)
        self.port_free = port + port_cycles
        feed = self.port_free - start
        work = comps if comps > feed else feed
        end = start + cfg.s_cache_latency + cfg.iu_setup + work + stall
        iu_free[iu] = end
        st = self.st
        st.iu_busy[iu] += end - start
        st.iu_compare[iu] += comps
        st.iu_wait[iu] += end - start - comps
        st.iu_ops[iu] += 1
        # blocked at the ROB head from the later of dispatch and the previous retire
        head = self.last_retire if self.last_retire > t else t
        self.spans.append((head if head < start else start, end))
        return iu, start, end

    def port_grant(self, t: int) -> int:
        """One S-Cache port cycle for a single-request client (fetch or translator).

        Round-robin arbitration grants it within one round of the IUs even
        while merges hold later reservations; the stolen cycle pushes the
        merge feed back by one.
        """
        busy = self.port_free - t
        if busy <= 0:
            self.port_free = t + 1
            return t
        self.port_free += 1
        return t + (busy if busy < self.cfg.n_ius else self.cfg.n_ius)

    def set_op(self, ev: TraceEvent) -> None:
        a, b = ev.sids_in
        sa, sb = self.stream(a), self.stream(b)
        out_sid = ev.sid_out
        slot = self.acquire(out_sid) if out_sid is not None else -1
        t = self.dispatch(1)
        ready = self.src_ready(ev.src_regs, t)
        _, _, end = self.merge(t, ready, (sa, sb), ev.reads, ev.comparisons)
        if out_sid is not None:
            self.mem.stream_store(ev.out_addr, ev.out_len)
            self.streams[out_sid] = _Stream(ev.out_addr, ev.out_len, end, slot)
        for r in ev.dst_regs:
            self.reg_ready[r] = end
        self.retire(end, 1)
        self.st.stream_ops += 1

    def vinter(self, ev: TraceEvent) -> None:
        cfg = self.cfg
        sa, sb = self.stream(ev.sids_in[0]), self.stream(ev.sids_in[1])
        t = self.dispatch(1)
        ready = self.src_ready(ev.src_regs, t)
        iu, start, end = self.merge(t, ready, (sa, sb), ev.reads, ev.comparisons)
        pairs = ev.value_loads
        m = len(pairs)
        done = end
        if m:
            span = max(1, end - start)
            vb = cfg.vbuf_entries
            vbuf_free = [0] * vb
            svpu = 0
            last_issue = 0
            mem = self.mem
            for p, (x, y) in enumerate(pairs):
                issue = start + (p + 1) * span // m
                slot_free = vbuf_free[p % vb]
                if slot_free > issue:
                    issue = slot_free
                last_issue = issue
                ra = mem.load(x, issue)
                rb = mem.load(y, issue)
                ready_v = ra if ra > rb else rb
                s = ready_v if ready_v > svpu else svpu
                svpu = s + 1
                vbuf_free[p % vb] = svpu
            if last_issue > end:
                # a full vBuf held the IU back
                extra = last_issue - end
                self.iu_free[iu] += extra
                self.st.iu_busy[iu] += extra
                self.st.iu_wait[iu] += extra
            done = max(end, svpu) + 1
            self.st.vinter_pairs += m
        for r in ev.dst_regs:
            self.reg_ready[r] = done
        self.retire(done, 1)
        self.st.stream_ops += 1

    def fetch(self, ev: TraceEvent) -> None:
        s = self.stream(ev.sids_in[0])
        t = self.dispatch(1)
        ready = self.src_ready(ev.src_regs, t)
        if s.ready > ready:
            ready = s.ready
        # a scalar fetch takes a whole S-Cache port cycle for one key
        done = self.port_grant(ready) + self.cfg.s_cache_latency
        for r in ev.dst_regs:
            self.reg_ready[r] = done
        self.retire(done, 1)

    def scalar(self, ev: TraceEvent) -> None:
        cfg = self.cfg
        entries = ev.count if ev.count < cfg.rob_size else cfg.rob_size
        t = self.dispatch(entries)
        start = self.src_ready(ev.src_regs, t)
        if ev.kind == "setop":
            done = start + cfg.setop_cpi * max(1, ev.comparisons)
            for addr, n in ev.key_ranges:
                if n:
                    ld = self.mem.load(addr, start)
                    if ld > done:
                        done = ld
        elif ev.reg_deps:
            # each written register waits only for its own inputs, not the whole bundle
            done = t + -(-ev.count // cfg.scalar_ipc)
            load = self.mem.load
            rr = self.reg_ready
            issued: dict[int, int] = {}
            for r, srcs, lds in ev.reg_deps:
                s = t
                for x in srcs:
                    if rr[x] > s:
                        s = rr[x]
                d = s + 1
                for addr in lds:
                    ld = issued.get(addr)
                    if ld is None:
                        ld = issued[addr] = load(addr, s)
                    if ld + 1 > d:
                        d = ld + 1
                rr[r] = d
                if d > done:
                    done = d
            self.retire(done, entries)
            return
        else:
            done = start + -(-ev.count // cfg.scalar_ipc)
            load = self.mem.load
            for addr in ev.loads:
                ld = load(addr, start)
                if ld + 1 > done:
                    done = ld + 1
        for r in ev.dst_regs:
            self.reg_ready[r] = done
        self.retire(done, entries)

    def nested(self, ev: TraceEvent) -> None:
        """Translate S_NESTINTER into per-element micro-op groups."""
        cfg = self.cfg
        s = self.stream(ev.sids_in[0])
        t0 = self.src_ready(ev.src_regs, self.front)
        if s.ready > t0:
            t0 = s.ready
        tb = cfg.tbuf_entries
        tbuf_free = [0] * tb
        bw = cfg.s_cache_bandwidth
        key_at = t0
        acc = t0
        mem = self.mem
        st = self.st
        for i, e in enumerate(ev.nested):
            # translation-buffer entry: element key from the S-Cache, then its stream-info loads
            issue = t0 + i
            if tbuf_free[i % tb] > issue:
                issue = tbuf_free[i % tb]
            if i % bw == 0:
                # the translator reads S sequentially, a port cycle brings in bw keys
                key_at = self.port_grant(issue) + cfg.s_cache_latency
            ready = issue + cfg.s_cache_latency
            if key_at > ready:
                ready = key_at
            for addr in e.info_addrs:
                ld = mem.load(addr, issue + cfg.s_cache_latency)
                if ld > ready:
                    ready = ld
            if ready > self.front:
                st.translator_wait_cycles += ready - self.front
                self.front = ready
            # S_READ of the bounded prefix of N(s_i)
            sid = self._tmp_sid
            slot = self.acquire(sid)
            td = self.dispatch(1)
            tbuf_free[i % tb] = td
            fill = mem.stream_fill(e.prefix_addr, min(e.prefix_len, cfg.slot_keys), td)
            if e.prefix_len:
                st.scache_fills += 1
            pre = _Stream(e.prefix_addr, e.prefix_len, fill, slot)
            self.streams[sid] = pre
            self.retire(td + 1, 1)
            # S_INTER.C of S with the prefix
            td = self.dispatch(1)
            _, _, end = self.merge(td, td, (s, pre), (e.read_s, e.read_prefix), e.comparisons)
            self.retire(end, 1)
            # S_FREE of the prefix
            td = self.dispatch(1)
            r = self.retire(td + 1, 1)
            self.release(sid, r)
            # ADD into the accumulator
            td = self.dispatch(1)
            a = max(td, end, acc)
            acc = a + 1
            self.retire(acc, 1)
            st.nested_micro_ops += 4
        for r in ev.dst_regs:
            self.reg_ready[r] = acc if ev.nested else t0 + 1
        st.stream_ops += 1

    def run(self, trace: Iterable[TraceEvent]) -> None:
        st = self.st
        for ev in trace:
            st.events += 1
            op = ev.op
            if op is _SCALAR:
                self.scalar(ev)
            elif op is _S_INTER_C or op is _S_INTER or op is _S_SUB or op is _S_SUB_C:
                self.set_op(ev)
            elif op is _S_READ or op is _S_VREAD:
                self.define_read(ev.sid_out, ev.key_ranges[0][0], ev.out_len, ev.src_regs)
                st.stream_ops += 1
            elif op is _S_FREE:
                self.free(ev.sids_in[0])
                st.stream_ops += 1
            elif op is _S_NEST:
                self.nested(ev)
            elif op is _S_VINTER:
                self.vinter(ev)
            elif op is _S_FETCH:
                self.fetch(ev)
                st.stream_ops += 1
            elif op is _S_CSR:
                t = self.dispatch(1)
                self.retire(t + 1, 1)
            else:
                raise SimulationError(f"unexpected {op.mnemonic} in trace")

    def finish(self) -> SimStats:
        st = self.st
        total = self.last_retire
        for r in self.reg_ready:
            if r > total:
                total = r
        st.total_cycles = total
        covered = 0
        cur_lo = cur_hi = -1
        for lo, hi in sorted(self.spans):
            if hi > total:
                hi = total
            if lo >= hi:
                continue
            if lo > cur_hi:
                covered += cur_hi - cur_lo if cur_hi > cur_lo else 0
                cur_lo, cur_hi = lo, hi
            elif hi > cur_hi:
                cur_hi = hi
        covered += cur_hi - cur_lo if cur_hi > cur_lo else 0
        st.intersection_cycles = covered
        st.other_cycles = total - covered
        st.l1_hits, st.l1_misses = self.mem.l1.hits, self.mem.l1.misses
        st.l2_hits, st.l2_misses = self.mem.l2.hits, self.mem.l2.misses
        return st


def _check(trace: list[TraceEvent], cfg: SimConfig) -> None:
    if cfg.key_bytes != KEY_BYTES:
        raise ConfigError(
            f"trace keys are {KEY_BYTES} bytes wide but the configuration sets key_bytes={cfg.key_bytes}"
        )
    if cfg.n_stream_regs < 1:
        raise ConfigError("need at least one stream register")


def simulate(trace: Iterable[TraceEvent], cfg: SimConfig | None = None) -> SimStats:
    """Replay ``trace`` and return cycle counts and component statistics.

    Deterministic: the same trace and configuration always give the same
    numbers. The trace is consumed once; pass a list to reuse it.
    """
    cfg = cfg or SimConfig()
    events = trace if isinstance(trace, list) else list(trace)
    _check(events, cfg)
    core = _Core(cfg)
    core.run(events)
    stats = core.finish()
    stats.histogram = stream_length_histogram(events)
    return stats


def breakdown(stats: SimStats) -> float:
    """Fraction of cycles with an intersection on an IU or holding up the head of the ROB."""
    return stats.intersection_fraction
