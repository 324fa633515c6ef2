import warnings

import pytest

from streamgpm.compiler import (
    CodegenOptions,
    FallbackWarning,
    Pattern,
    PatternError,
    automorphisms,
    clique,
    codegen,
    compile_pattern,
    cycle,
    matching_order,
    naive_count,
    nested_eligible,
    parse_pattern,
    path,
    star,
    tailed_triangle,
    triangle,
    wedge,
)
from streamgpm.graph import complete_graph, erdos_renyi
from streamgpm.isa import Opcode, execute, lifecycle_audit
from streamgpm.oracle import oracle_count

SUITE = [triangle(), wedge(), wedge("edge"), tailed_triangle(), tailed_triangle("vertex"), clique(4), clique(5),
         cycle(4), cycle(4, "vertex"), path(4), star(3), star(3, "vertex"), cycle(5)]


def test_pattern_text_format():
    p = parse_pattern("3\n0 1\n1 2\nlabel 0 1\nlabel 1 2\nlabel 2 1\n", mode="vertex")
    assert p.k == 3 and p.num_edges == 2 and list(p.labels) == [1, 2, 1] and p.mode == "vertex"
    assert parse_pattern(p.to_text(), mode="vertex").edges == p.edges


@pytest.mark.parametrize("text", ["", "3\n0 1\n", "2\n0 0\n", "2\n0 5\n", "3\n0 1\n1 2\nlabel 0 1\n"])
def test_bad_patterns(text):
    with pytest.raises(PatternError):
        parse_pattern(text)


@pytest.mark.parametrize("p,n", [(triangle(), 6), (clique(4), 24), (wedge(), 2), (tailed_triangle(), 2),
                                 (cycle(4), 8), (star(3), 6), (path(4), 2)])
def test_automorphism_counts(p, n):
    assert len(automorphisms(p)) == n


def test_matching_order_starts_at_highest_degree():
    order = matching_order(tailed_triangle())
    assert tailed_triangle().degree(order[0]) == 3


def test_prefix_must_be_connected():
    with pytest.raises(PatternError):
        compile_pattern(path(4), order=(0, 3, 1, 2))


@pytest.mark.parametrize("p", SUITE, ids=str)
def test_schedule_and_program_match_oracle(p):
    g = erdos_renyi(25, 0.3, seed=11)
    want = oracle_count(g, p)
    s = compile_pattern(p)
    assert naive_count(s, g) == want
    for nested in (True, False):
        prog = codegen(s, CodegenOptions(nested=nested))
        ex = execute(prog, g)
        assert ex.result == want
        rep = lifecycle_audit(ex.trace)
        assert rep.ok and rep.high_water <= 16 and rep.fallback_ops == 0


@pytest.mark.parametrize("p", [triangle(), clique(4), tailed_triangle(), cycle(4), star(3)], ids=str)
def test_removing_restrictions_multiplies_by_automorphisms(p):
    g = erdos_renyi(20, 0.35, seed=6)
    free = compile_pattern(p, restrictions=frozenset())
    assert naive_count(free, g) == len(automorphisms(p)) * naive_count(compile_pattern(p), g)


def test_nested_instruction_used_for_cliques():
    for p in (triangle(), clique(4), clique(5)):
        s = compile_pattern(p)
        assert nested_eligible(s)
        assert codegen(s, CodegenOptions(nested=True)).count(Opcode.S_NESTINTER) == 1
        assert codegen(s, CodegenOptions(nested=False)).count(Opcode.S_NESTINTER) == 0


def test_tiny_register_budget_falls_back_with_warning():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        prog = codegen(compile_pattern(clique(5)), CodegenOptions(nested=False, n_regs=2))
    assert any(issubclass(w.category, FallbackWarning) for w in caught) or prog.warnings
    ex = execute(prog, complete_graph(6), n_stream_regs=2)
    assert ex.result == 6
    assert lifecycle_audit(ex.trace).fallback_ops > 0


def test_labeled_pattern_respects_labels():
    g = erdos_renyi(30, 0.3, seed=2, num_labels=2)
    p = Pattern(3, [(0, 1), (1, 2), (0, 2)], labels=[0, 0, 1])
    prog = codegen(compile_pattern(p))
    from streamgpm.apps import run_programs

    totals, _ = run_programs(g, [prog], trace=False)
    assert totals[0] == oracle_count(g, p)
