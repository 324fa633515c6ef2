import io

import numpy as np
import pytest

from streamgpm.graph import complete_graph, erdos_renyi
from streamgpm.isa import (
    AssemblyError,
    Machine,
    Memory,
    Opcode,
    StreamAPI,
    StreamKindError,
    StreamOverflowError,
    UndefinedStreamError,
    assemble,
    disassemble,
    execute,
    lifecycle_audit,
    read_jsonl,
    write_jsonl,
)

TRIANGLE_FLAT = """
    S_CSR r4, r5, r6
    MOV r3, 0
    MOV r8, r1
loop:
    BGE r8, r2, done
    LDNBR r9, r10, r8
    LDBND r10, r8
    S_READ r9, r10, 0
    MOV r11, 0
inner:
    S_FETCH 0, r11, r12
    ADD r11, r11, 1
    BEQ r12, 4294967295, next
    LDNBR r13, r14, r12
    LDBND r14, r12
    S_READ r13, r14, 1
    S_INTER.C 0, 1, r15, r12
    S_FREE 1
    ADD r3, r3, r15
    JMP inner
next:
    S_FREE 0
    ADD r8, r8, 1
    JMP loop
done:
    HALT
"""


def test_assemble_disassemble_round_trip():
    prog = assemble(TRIANGLE_FLAT)
    again = assemble(disassemble(prog))
    assert disassemble(again) == disassemble(prog)
    assert prog.count(Opcode.S_READ) == 2


@pytest.mark.parametrize("text", ["S_READ r1\n", "BOGUS r1, r2\n", "JMP nowhere\n", "S_VINTER 0, 1, r2, XOR\n"])
def test_assembly_errors(text):
    with pytest.raises(AssemblyError):
        assemble(text)


def test_hand_written_triangle_program():
    g = erdos_renyi(40, 0.25, seed=2)
    a = np.zeros((40, 40), dtype=np.int64)
    for u, v in g.edges():
        a[u, v] = a[v, u] = 1
    want = int(np.trace(a @ a @ a)) // 6
    ex = execute(assemble(TRIANGLE_FLAT), g)
    assert ex.result == want
    assert ex.stream_high_water == 2
    rep = lifecycle_audit(ex.trace)
    assert rep.ok and rep.defines == rep.frees


def test_nested_instruction_matches_flat_loop():
    g = erdos_renyi(40, 0.25, seed=4)
    nested = assemble("""
        S_CSR r4, r5, r6
        MOV r3, 0
        MOV r8, r1
    loop:
        BGE r8, r2, done
        LDNBR r9, r10, r8
        LDBND r10, r8
        S_READ r9, r10, 0
        S_NESTINTER 0, r10
        S_FREE 0
        ADD r3, r3, r10
        ADD r8, r8, 1
        JMP loop
    done:
        HALT
    """)
    assert execute(nested, g).result == execute(assemble(TRIANGLE_FLAT), g).result


def test_vinter_program():
    m = Machine(Memory())
    ka = m.memory.place(np.array([1, 3, 7], dtype=np.uint32))
    va = m.memory.place(np.array([45.0, 21.0, 13.0]))
    kb = m.memory.place(np.array([2, 5, 7], dtype=np.uint32))
    vb = m.memory.place(np.array([14.0, 36.0, 2.0]))
    prog = assemble(f"""
        S_VREAD {ka}, 3, 0, {va}
        S_VREAD {kb}, 3, 1, {vb}
        S_VINTER 0, 1, r3, MAC
        S_FREE 0
        S_FREE 1
        HALT
    """)
    ex = m.execute(prog)
    ev = [e for e in ex.trace if e.op is Opcode.S_VINTER][0]
    assert ev.result == 26.0
    assert len(ev.value_loads) == 1


def test_use_before_define_and_kind_errors():
    with pytest.raises(UndefinedStreamError):
        execute(assemble("S_INTER.C 0, 1, r3\nHALT\n"))
    m = Machine(Memory())
    k = m.memory.place(np.array([1, 2], dtype=np.uint32))
    v = m.memory.place(np.array([1.0, 2.0]))
    with pytest.raises(StreamKindError):
        m.execute(assemble(f"S_READ {k}, 2, 0\nS_VREAD {k}, 2, 1, {v}\nS_VINTER 0, 1, r3, MAC\nHALT\n"))


def test_seventeen_live_streams_overflow():
    m = Machine(Memory())
    k = m.memory.place(np.array([1, 2], dtype=np.uint32))
    body = "".join(f"S_READ {k}, 2, {i}\n" for i in range(17))
    with pytest.raises(StreamOverflowError):
        m.execute(assemble(body + "HALT\n"))


def test_trace_jsonl_round_trip():
    ex = execute(assemble(TRIANGLE_FLAT), complete_graph(5))
    buf = io.StringIO()
    n = write_jsonl(ex.trace, buf)
    buf.seek(0)
    back = read_jsonl(buf)
    assert n == len(back) == len(ex.trace)
    assert [e.to_dict() for e in back] == [e.to_dict() for e in ex.trace]


def test_scalar_work_is_bundled():
    ex = execute(assemble(TRIANGLE_FLAT), complete_graph(6))
    scal = [e for e in ex.trace if e.op is Opcode.SCALAR]
    assert scal and all(1 <= e.count <= 32 for e in scal)


def test_audit_flags_late_and_missing_frees():
    m = Machine(Memory())
    k = m.memory.place(np.array([1, 2, 3], dtype=np.uint32))
    ex = m.execute(assemble(f"""
        S_READ {k}, 3, 0
        S_READ {k}, 3, 1
        S_INTER.C 0, 1, r3
        S_READ {k}, 3, 2
        S_INTER.C 1, 2, r3
        S_FREE 0
        S_FREE 1
        HALT
    """))
    rep = lifecycle_audit(ex.trace)
    assert not rep.ok
    assert rep.unfreed == [2]
    assert [sid for sid, _ in rep.late_frees] == [0]


def test_stream_api_high_level_calls():
    g = complete_graph(5)
    api = StreamAPI(g)
    a = api.neighbor_set(4)
    b = api.neighbor_set(3)
    c = api.intersect_vertex_set(a, b)
    assert api.elements(c) == [0, 1, 2]
    assert api.intersect_vertex_set_count(a, b, bound=2) == 2
    assert api.subtract_vertex_set_count(a, b) == 1
    for h in (a, b, c):
        api.release_vertex_set(h)
    s = api.neighbor_set(4, below_self=True)
    assert api.nest_counting(s) == 6
    api.release_vertex_set(s)
    rep = lifecycle_audit(api.trace)
    assert rep.defines == rep.frees and not rep.unfreed and not rep.double_frees
