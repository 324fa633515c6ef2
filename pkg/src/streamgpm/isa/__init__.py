"""Stream ISA: instructions, assembler, functional executor and traces."""
from .api import StreamAPI
from .instructions import (
    NUM_REGS,
    SIGNATURES,
    AssemblyError,
    Imm,
    Instruction,
    Opcode,
    Program,
    Reg,
    Sym,
    assemble,
    disassemble,
)
from .machine import (
    DEFAULT_STREAM_REGS,
    CSRLayout,
    Execution,
    Machine,
    MachineError,
    Memory,
    MemoryFault,
    StreamError,
    StreamKindError,
    StreamOverflowError,
    StreamTable,
    UndefinedStreamError,
    execute,
    place_graph,
)
from .trace import (
    AuditReport,
    NestedElement,
    TraceEvent,
    length_cdf,
    lifecycle_audit,
    read_jsonl,
    stream_length_histogram,
    write_jsonl,
)

__all__ = [name for name in dir() if not name.startswith("_")]
