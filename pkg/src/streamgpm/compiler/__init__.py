"""Pattern compiler: matching order, symmetry breaking and stream-ISA code generation."""
from .codegen import CodegenOptions, FallbackWarning, StreamAllocator, codegen, nested_eligible
from .pattern import (
    MAX_PATTERN_SIZE,
    Pattern,
    PatternError,
    automorphisms,
    clique,
    cycle,
    derive_restrictions,
    load_pattern,
    parse_pattern,
    path,
    restriction_closure,
    star,
    tailed_triangle,
    transitive_reduction,
    triangle,
    wedge,
)
from .schedule import Level, Schedule, compile_pattern, matching_order, naive_count

__all__ = [name for name in dir() if not name.startswith("_")]
