"""Stream-ISA simulator for graph pattern mining."""
from __future__ import annotations

__version__ = "0.1.0"
