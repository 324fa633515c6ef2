"""Instruction definitions, operand roles, and the text assembler.

Text format, one instruction per line::

    loop:                       ; labels end with ':'
        S_FETCH r8, r9, r10     ; opcode then comma-separated operands
        S_INTER.C r7, r8, r11, -1

Registers are ``r0``..``r31``; bare integers are immediates; bare words are
symbols (reduction ops, scalar kinds) or branch labels.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Union

__all__ = [
    "NUM_REGS",
    "AssemblyError",
    "Opcode",
    "Reg",
    "Imm",
    "Sym",
    "Operand",
    "Instruction",
    "Program",
    "SIGNATURES",
    "STREAM_OPS",
    "assemble",
    "disassemble",
]

NUM_REGS = 32


class AssemblyError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class Opcode(Enum):
    # stream extension
    S_READ = "S_READ"
    S_VREAD = "S_VREAD"
    S_FREE = "S_FREE"
    S_FETCH = "S_FETCH"
    S_SUB = "S_SUB"
    S_SUB_C = "S_SUB.C"
    S_INTER = "S_INTER"
    S_INTER_C = "S_INTER.C"
    S_VINTER = "S_VINTER"
    S_CSR = "S_CSR"
    S_NESTINTER = "S_NESTINTER"
    # bundled scalar work with no architectural effect
    SCALAR = "SCALAR"
    # minimal scalar subset used for loop control around stream instructions
    MOV = "MOV"
    ADD = "ADD"
    SUB = "SUB"
    MUL = "MUL"
    MIN = "MIN"
    BLT = "BLT"
    BGE = "BGE"
    BEQ = "BEQ"
    BNE = "BNE"
    JMP = "JMP"
    LDNBR = "LDNBR"
    LDBND = "LDBND"
    LDK = "LDK"
    ALLOC = "ALLOC"
    XINTER = "XINTER"
    XINTER_C = "XINTER.C"
    XSUB = "XSUB"
    XSUB_C = "XSUB.C"
    HALT = "HALT"

    @property
    def mnemonic(self) -> str:
        return self.value

    @property
    def is_stream(self) -> bool:
        return self in STREAM_OPS


STREAM_OPS = frozenset(
    {
        Opcode.S_READ,
        Opcode.S_VREAD,
        Opcode.S_FREE,
        Opcode.S_FETCH,
        Opcode.S_SUB,
        Opcode.S_SUB_C,
        Opcode.S_INTER,
        Opcode.S_INTER_C,
        Opcode.S_VINTER,
        Opcode.S_CSR,
        Opcode.S_NESTINTER,
    }
)

_BY_MNEMONIC = {op.value: op for op in Opcode}


@dataclass(frozen=True)
class Reg:
    index: int

    def __post_init__(self) -> None:
        if not 0 <= self.index < NUM_REGS:
            raise AssemblyError(f"register r{self.index} out of range")

    def __str__(self) -> str:
        return f"r{self.index}"


@dataclass(frozen=True)
class Imm:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Sym:
    name: str

    def __str__(self) -> str:
        return self.name


Operand = Union[Reg, Imm, Sym]

# Operand roles:
#   v  value read (register or immediate)
#   s  stream ID (register or immediate)
#   d  destination register
#   k  symbol (scalar kind or reduction op)
#   l  branch label
# A trailing '?' marks an optional operand.
SIGNATURES: dict[Opcode, tuple[str, ...]] = {
    Opcode.S_READ: ("v", "v", "s"),
    Opcode.S_VREAD: ("v", "v", "s", "v"),
    Opcode.S_FREE: ("s",),
    Opcode.S_FETCH: ("s", "v", "d"),
    Opcode.S_SUB: ("s", "s", "s", "v?"),
    Opcode.S_SUB_C: ("s", "s", "d", "v?"),
    Opcode.S_INTER: ("s", "s", "s", "v?"),
    Opcode.S_INTER_C: ("s", "s", "d", "v?"),
    Opcode.S_VINTER: ("s", "s", "d", "k"),
    Opcode.S_CSR: ("v", "v", "v"),
    Opcode.S_NESTINTER: ("s", "d"),
    Opcode.SCALAR: ("k", "v"),
    Opcode.MOV: ("d", "v"),
    Opcode.ADD: ("d", "v", "v"),
    Opcode.SUB: ("d", "v", "v"),
    Opcode.MUL: ("d", "v", "v"),
    Opcode.MIN: ("d", "v", "v"),
    Opcode.BLT: ("v", "v", "l"),
    Opcode.BGE: ("v", "v", "l"),
    Opcode.BEQ: ("v", "v", "l"),
    Opcode.BNE: ("v", "v", "l"),
    Opcode.JMP: ("l",),
    # dAddr, dLen <- (edge-array address, degree) of vertex v
    Opcode.LDNBR: ("d", "d", "v"),
    # d <- bound offset of vertex v
    Opcode.LDBND: ("d", "v"),
    # d <- 32-bit key at base + 4 * index
    Opcode.LDK: ("d", "v", "v"),
    # d <- address of a scratch buffer of at least n keys, owned by this instruction
    Opcode.ALLOC: ("d", "v"),
    # scalar set operations over memory buffers:
    #   dLen, aAddr, aLen, bAddr, bLen, outAddr, bound
    Opcode.XINTER: ("d", "v", "v", "v", "v", "v", "v"),
    Opcode.XSUB: ("d", "v", "v", "v", "v", "v", "v"),
    #   dCount, aAddr, aLen, bAddr, bLen, bound
    Opcode.XINTER_C: ("d", "v", "v", "v", "v", "v"),
    Opcode.XSUB_C: ("d", "v", "v", "v", "v", "v"),
    Opcode.HALT: (),
}

REDUCE_SYMBOLS = ("MAC", "MAX", "MIN")
SCALAR_KINDS = ("alu", "branch", "load", "setop")


@dataclass(frozen=True)
class Instruction:
    op: Opcode
    args: tuple[Operand, ...] = ()
    line: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        _check_roles(self.op, self.args, self.line)

    def __str__(self) -> str:
        if not self.args:
            return self.op.mnemonic
        return f"{self.op.mnemonic} " + ", ".join(str(a) for a in self.args)


@dataclass(frozen=True)
class Program:
    """Immutable instruction list with resolved label targets."""

    instructions: tuple[Instruction, ...]
    labels: dict[str, int] = field(default_factory=dict)
    name: str = ""
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for ins in self.instructions:
            for role, arg in zip(SIGNATURES[ins.op], ins.args):
                if role == "l" and arg.name not in self.labels:  # type: ignore[union-attr]
                    raise AssemblyError(f"undefined label {arg}", ins.line)
        for name, pc in self.labels.items():
            if not 0 <= pc <= len(self.instructions):
                raise AssemblyError(f"label {name} points outside the program")

    def __len__(self) -> int:
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    def count(self, op: Opcode) -> int:
        return sum(1 for ins in self.instructions if ins.op is op)


def _check_roles(op: Opcode, args: tuple[Operand, ...], line: int | None) -> None:
    roles = SIGNATURES[op]
    required = sum(1 for r in roles if not r.endswith("?"))
    if not required <= len(args) <= len(roles):
        want = str(required) if required == len(roles) else f"{required}-{len(roles)}"
        raise AssemblyError(f"{op.mnemonic} takes {want} operands, got {len(args)}", line)
    for pos, (role, arg) in enumerate(zip(roles, args), start=1):
        role = role.rstrip("?")
        ok = {
            "v": isinstance(arg, (Reg, Imm)),
            "s": isinstance(arg, (Reg, Imm)),
            "d": isinstance(arg, Reg),
            "k": isinstance(arg, (Sym, Imm)),
            "l": isinstance(arg, Sym),
        }[role]
        if not ok:
            raise AssemblyError(f"{op.mnemonic} operand {pos} ({arg}) has the wrong kind", line)
        if role == "k" and isinstance(arg, Sym):
            allowed = REDUCE_SYMBOLS if op is Opcode.S_VINTER else SCALAR_KINDS
            if arg.name not in allowed:
                raise AssemblyError(f"{op.mnemonic}: unknown selector {arg.name}", line)
        if role == "k" and isinstance(arg, Imm) and op is Opcode.S_VINTER and not 0 <= arg.value < 3:
            raise AssemblyError("S_VINTER op selector must be 0, 1 or 2", line)
    if op is Opcode.SCALAR and isinstance(args[1], Imm) and args[1].value < 1:
        raise AssemblyError("SCALAR count must be positive", line)


_REG_RE = re.compile(r"^r(\d+)$", re.IGNORECASE)
_INT_RE = re.compile(r"^[-+]?(0x[0-9a-fA-F]+|\d+)$")
_NAME_RE = re.compile(r"^[A-Za-z_.][A-Za-z0-9_.]*$")


def _parse_operand(tok: str, line: int) -> Operand:
    m = _REG_RE.match(tok)
    if m:
        idx = int(m.group(1))
        if idx >= NUM_REGS:
            raise AssemblyError(f"no register {tok}", line)
        return Reg(idx)
    if _INT_RE.match(tok):
        return Imm(int(tok, 0))
    if _NAME_RE.match(tok):
        return Sym(tok)
    raise AssemblyError(f"cannot parse operand {tok!r}", line)


def assemble(text: str, name: str = "") -> Program:
    instructions: list[Instruction] = []
    labels: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0].strip()
        while line and ":" in line.split()[0]:
            label, _, line = line.partition(":")
            label = label.strip()
            if not _NAME_RE.match(label):
                raise AssemblyError(f"bad label {label!r}", lineno)
            if label in labels:
                raise AssemblyError(f"duplicate label {label}", lineno)
            labels[label] = len(instructions)
            line = line.strip()
        if not line:
            continue
        mnemonic, _, rest = line.partition(" ")
        op = _BY_MNEMONIC.get(mnemonic.upper())
        if op is None:
            raise AssemblyError(f"unknown opcode {mnemonic}", lineno)
        toks = [t.strip() for t in rest.split(",")] if rest.strip() else []
        if any(not t for t in toks):
            raise AssemblyError("empty operand", lineno)
        args = tuple(_parse_operand(t, lineno) for t in toks)
        instructions.append(Instruction(op, args, lineno))
    return Program(tuple(instructions), labels, name)


def disassemble(program: Program | Iterable[Instruction]) -> str:
    """Canonical text: labels on their own lines, instructions indented four spaces."""
    if not isinstance(program, Program):
        program = Program(tuple(program))
    by_pc: dict[int, list[str]] = {}
    for name, pc in program.labels.items():
        by_pc.setdefault(pc, []).append(name)
    out: list[str] = []
    for pc, ins in enumerate(program.instructions):
        for name in sorted(by_pc.get(pc, ())):
            out.append(f"{name}:")
        out.append(f"    {ins}")
    for name in sorted(by_pc.get(len(program.instructions), ())):
        out.append(f"{name}:")
    return "\n".join(out) + "\n"
