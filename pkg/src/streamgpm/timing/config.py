"""Simulator configuration and statistics records."""
from __future__ import annotations

import dataclasses
import math
import os
import re
from dataclasses import dataclass, field
from typing import Any, Mapping, TextIO

__all__ = ["ConfigError", "SimConfig", "SimStats", "load_config", "parse_config", "CONFIG_ALIASES"]


class ConfigError(ValueError):
    """Invalid simulator configuration, or a configuration that does not fit the trace."""


@dataclass(frozen=True)
class SimConfig:
    """Core parameters. Sizes in bytes, latencies in cycles, bandwidth in keys per cycle."""

    rob_size: int = 128
    load_queue: int = 32
    dispatch_width: int = 4
    scalar_ipc: int = 2
    setop_cpi: int = 3  # cycles per comparison of a software set operation
    line_bytes: int = 64
    l1_size: int = 64 * 1024
    l1_assoc: int = 8
    l1_latency: int = 4
    l2_size: int = 2 * 1024 * 1024
    l2_assoc: int = 16
    l2_latency: int = 10
    mem_controllers: int = 3
    controller_latency: int = 40
    dram_latency: int = 15  # CL10 at 1333 MT/s is 15 ns, one cycle per ns at 1 GHz
    dram_occupancy: int = 6  # a 64-byte burst on one DDR3-1333 channel
    s_cache_latency: int = 1
    s_cache_bandwidth: int = 4
    slot_keys: int = 64
    subslot_keys: int = 32
    n_stream_regs: int = 16
    n_ius: int = 4
    iu_setup: int = 1
    vbuf_entries: int = 32
    tbuf_entries: int = 16
    key_bytes: int = 4
    value_bytes: int = 8

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{f.name} must be an integer, got {v!r}")
            if v <= 0:
                raise ConfigError(f"{f.name} must be positive, got {v}")
        if self.slot_keys != 2 * self.subslot_keys:
            raise ConfigError("a stream-cache slot must hold exactly two sub-slots")
        if not 1 <= self.n_ius <= 16:
            raise ConfigError("n_ius must lie in 1..16")
        if self.line_bytes % self.key_bytes:
            raise ConfigError("cache lines must hold a whole number of keys")
        for level in ("l1", "l2"):
            size, assoc = getattr(self, f"{level}_size"), getattr(self, f"{level}_assoc")
            if size % (assoc * self.line_bytes):
                raise ConfigError(f"{level}_size must be a multiple of {level}_assoc * line_bytes")

    @property
    def keys_per_line(self) -> int:
        return self.line_bytes // self.key_bytes

    @property
    def memory_latency(self) -> int:
        return self.controller_latency + self.dram_latency

    @property
    def slot_fill_cycles(self) -> int:
        """Cycles to fill one slot from L2 (all lines resident)."""
        return self.l2_latency + math.ceil(self.slot_keys * self.key_bytes / self.line_bytes)

    def replace(self, **overrides) -> SimConfig:
        return dataclasses.replace(self, **_canonical(overrides))

    def to_dict(self) -> dict[str, int]:
        return dataclasses.asdict(self)


# short names accepted in config files and on the command line
CONFIG_ALIASES = {
    "ius": "n_ius",
    "iu": "n_ius",
    "scache_bw": "s_cache_bandwidth",
    "bw": "s_cache_bandwidth",
    "rob": "rob_size",
    "lq": "load_queue",
    "stream_regs": "n_stream_regs",
    "vbuf": "vbuf_entries",
    "tbuf": "tbuf_entries",
    "translation_buffer": "tbuf_entries",
}

_UNITS = {"": 1, "b": 1, "kib": 1024, "kb": 1024, "k": 1024, "mib": 1 << 20, "mb": 1 << 20, "m": 1 << 20}
_FIELDS = {f.name for f in dataclasses.fields(SimConfig)}


def _canonical(raw: Mapping[str, Any]) -> dict[str, Any]:
    out = {}
    for key, value in raw.items():
        name = key.strip().lower().replace("-", "_")
        name = CONFIG_ALIASES.get(name, name)
        if name not in _FIELDS:
            raise ConfigError(f"unknown configuration key {key!r}")
        out[name] = _value(name, value)
    return out


def _value(name: str, value: Any) -> int:
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    text = str(value).strip()
    m = re.fullmatch(r"(\d+)\s*([A-Za-z]*)", text)
    if not m or m.group(2).lower() not in _UNITS:
        raise ConfigError(f"bad value for {name}: {value!r}")
    return int(m.group(1)) * _UNITS[m.group(2).lower()]


def parse_config(text: str, base: SimConfig | None = None) -> SimConfig:
    """Parse ``key = value`` lines (``#`` comments; sizes may carry KiB/MiB suffixes)."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        raw[key] = value
    return (base or SimConfig()).replace(**raw)


def load_config(source: str | os.PathLike | TextIO, base: SimConfig | None = None) -> SimConfig:
    if hasattr(source, "read"):
        return parse_config(source.read(), base)  # type: ignore[union-attr]
    with open(source, encoding="utf-8") as fh:
        return parse_config(fh.read(), base)


@dataclass
class SimStats:
    total_cycles: int = 0
    intersection_cycles: int = 0
    other_cycles: int = 0
    events: int = 0
    instructions: int = 0
    stream_ops: int = 0
    nested_micro_ops: int = 0
    vinter_pairs: int = 0
    iu_busy: list[int] = field(default_factory=list)
    iu_compare: list[int] = field(default_factory=list)
    iu_wait: list[int] = field(default_factory=list)
    iu_ops: list[int] = field(default_factory=list)
    scache_fills: int = 0
    scache_refills: int = 0
    l1_hits: int = 0
    l1_misses: int = 0
    l2_hits: int = 0
    l2_misses: int = 0
    memory_requests: int = 0
    rob_full_cycles: int = 0
    stream_stall_cycles: int = 0
    load_queue_full_cycles: int = 0
    translator_wait_cycles: int = 0
    max_rob_occupancy: int = 0
    max_load_queue_occupancy: int = 0
    histogram: dict[int, int] = field(default_factory=dict)

    @property
    def intersection_fraction(self) -> float:
        return self.intersection_cycles / self.total_cycles if self.total_cycles else 0.0

    @property
    def l1_accesses(self) -> int:
        return self.l1_hits + self.l1_misses

    @property
    def l2_accesses(self) -> int:
        return self.l2_hits + self.l2_misses

    def cdf(self) -> list[tuple[int, float]]:
        from ..isa.trace import length_cdf

        return length_cdf(self.histogram)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["histogram"] = {str(k): v for k, v in self.histogram.items()}
        d["intersection_fraction"] = self.intersection_fraction
        return d
