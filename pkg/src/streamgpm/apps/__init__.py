"""Workloads: pattern counting, frequent subgraph mining and sparse kernels."""
from .fsm import FSM_MAX_EDGES, SupportMetric, canonical_form, downward_closure_audit, fsm, subpatterns
from .mining import APPS, MiningResult, app_patterns, count_pattern, mine_pattern, run_programs
from .sparse import KernelResult, ShapeError, run_kernel, spgemm, ttm, ttv

__all__ = [name for name in dir() if not name.startswith("_")]
