"""Set-associative LRU caches, memory controllers and the load queue."""
from __future__ import annotations

import heapq

from .config import SimConfig, SimStats

__all__ = ["LRUCache", "MemorySystem"]


class LRUCache:
    """Tag store only; a dict per set keeps LRU order by insertion."""

    def __init__(self, size: int, assoc: int, line: int):
        self.assoc = assoc
        self.n_sets = size // (assoc * line)
        self.sets: list[dict[int, None]] = [{} for _ in range(self.n_sets)]
        self.hits = 0
        self.misses = 0

    def access(self, line: int) -> bool:
        s = self.sets[line % self.n_sets]
        if line in s:
            del s[line]
            s[line] = None
            self.hits += 1
            return True
        self.misses += 1
        if len(s) >= self.assoc:
            del s[next(iter(s))]
        s[line] = None
        return False

    def insert(self, line: int) -> None:
        """Install without counting an access (write allocation)."""
        s = self.sets[line % self.n_sets]
        if line in s:
            del s[line]
        elif len(s) >= self.assoc:
            del s[next(iter(s))]
        s[line] = None

    def __contains__(self, line: int) -> bool:
        return line in self.sets[line % self.n_sets]


class MemorySystem:
    """L1 and L2 plus address-interleaved memory controllers.

    Accesses are applied in trace order; the times passed in only decide
    queueing at the controllers and in the load queue.
    """

    def __init__(self, cfg: SimConfig, stats: SimStats):
        self.cfg = cfg
        self.stats = stats
        self.l1 = LRUCache(cfg.l1_size, cfg.l1_assoc, cfg.line_bytes)
        self.l2 = LRUCache(cfg.l2_size, cfg.l2_assoc, cfg.line_bytes)
        self.ctrl_free = [0] * cfg.mem_controllers
        self.lq: list[int] = []  # completion times of loads in flight
        self.line_bytes = cfg.line_bytes

    def _memory(self, line: int, t: int) -> int:
        c = line % len(self.ctrl_free)
        start = t if t > self.ctrl_free[c] else self.ctrl_free[c]
        self.ctrl_free[c] = start + self.cfg.dram_occupancy
        self.stats.memory_requests += 1
        return start + self.cfg.memory_latency

    def _l2_line(self, line: int, t: int) -> int:
        """Time a line requested from L2 at ``t`` is available."""
        if self.l2.access(line):
            return t + self.cfg.l2_latency
        return self._memory(line, t + self.cfg.l2_latency)

    def load(self, addr: int, t: int) -> int:
        """Scalar or value load through the load queue, L1 and L2; returns the completion time."""
        lq = self.lq
        while lq and lq[0] <= t:
            heapq.heappop(lq)
        if len(lq) >= self.cfg.load_queue:
            free_at = heapq.heappop(lq)
            self.stats.load_queue_full_cycles += free_at - t
            t = free_at
        line = addr // self.line_bytes
        if self.l1.access(line):
            done = t + self.cfg.l1_latency
        else:
            done = self._l2_line(line, t + self.cfg.l1_latency)
        heapq.heappush(lq, done)
        if len(lq) > self.stats.max_load_queue_occupancy:
            self.stats.max_load_queue_occupancy = len(lq)
        return done

    def stream_fill(self, addr: int, n_keys: int, t: int) -> int:
        """Bring ``n_keys`` keys starting at ``addr`` into a stream-cache slot, bypassing L1.

        Lines stream back one per cycle after the L2 latency; missing lines
        come from memory. Returns the time the last line lands.
        """
        if n_keys <= 0:
            return t
        lb = self.line_bytes
        first = addr // lb
        last = (addr + n_keys * self.cfg.key_bytes - 1) // lb
        done = t
        for i, line in enumerate(range(first, last + 1), start=1):
            ready = self._l2_line(line, t) + i
            if ready > done:
                done = ready
        return done

    def stream_store(self, addr: int, n_keys: int) -> None:
        """Produced stream written back: lines allocate in L2."""
        if n_keys <= 0:
            return
        lb = self.line_bytes
        for line in range(addr // lb, (addr + n_keys * self.cfg.key_bytes - 1) // lb + 1):
            self.l2.insert(line)
