"""Cycle-approximate replay of stream-ISA traces."""
from .cache import LRUCache, MemorySystem
from .config import CONFIG_ALIASES, ConfigError, SimConfig, SimStats, load_config, parse_config
from .engine import SimulationError, breakdown, simulate

__all__ = [name for name in dir() if not name.startswith("_")]
