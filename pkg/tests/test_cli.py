import json

import numpy as np
import pytest

from streamgpm.cli import main
from streamgpm.graph import dump_edge_list, dump_matrix, dump_tensor, erdos_renyi, random_sparse_tensor
from streamgpm.graph import SparseMatrix
from streamgpm.oracle import dense_reference


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


@pytest.fixture
def k4(tmp_path):
    p = tmp_path / "k4.txt"
    p.write_text("0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n")
    return str(p)


@pytest.fixture
def dense(tmp_path):
    p = tmp_path / "er.txt"
    p.write_text(dump_edge_list(erdos_renyi(120, 0.2, seed=1)))
    return str(p)


def test_mine_without_timing(capsys, k4):
    code, rep, err = run(capsys, "mine", k4, "T", "--no-timing")
    assert code == 0
    assert rep["count"] == 4 and rep["schema_version"] == 1 and rep["stats"] is None
    assert rep["cdf"][-1][1] == 1.0
    assert "T" in err  # summary table


def test_nested_flag_never_changes_counts(capsys, dense):
    counts = [run(capsys, "mine", dense, "4C", flag, "--quiet")[1]["count"] for flag in ("--nested", "--no-nested")]
    assert counts[0] == counts[1]


def test_more_ius_not_slower(capsys, k4):
    one = run(capsys, "mine", k4, "T", "--timing", "--ius", "1")[1]
    four = run(capsys, "mine", k4, "T", "--timing", "--ius", "4")[1]
    assert four["stats"]["total_cycles"] <= one["stats"]["total_cycles"]
    assert one["config"]["n_ius"] == 1


def test_config_file_from_environment(capsys, k4, tmp_path, monkeypatch):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text("ius = 2\nrob = 64\n")
    monkeypatch.setenv("STREAMGPM_CONFIG", str(cfg))
    rep = run(capsys, "mine", k4, "T", "--timing", "--scache-bw", "8")[1]
    assert (rep["config"]["n_ius"], rep["config"]["rob_size"], rep["config"]["s_cache_bandwidth"]) == (2, 64, 8)


def test_pattern_file_and_mode(capsys, k4, tmp_path):
    pat = tmp_path / "wedge.txt"
    pat.write_text("3\n0 1\n0 2\n")
    assert run(capsys, "mine", k4, str(pat), "--mode", "vertex")[1]["count"] == 0
    assert run(capsys, "mine", k4, str(pat), "--mode", "edge")[1]["count"] == 12


def test_fsm_through_cli(capsys, tmp_path):
    g = erdos_renyi(15, 0.3, seed=2, num_labels=2)
    p = tmp_path / "lab.txt"
    p.write_text(dump_edge_list(g))
    code, rep, _ = run(capsys, "mine", str(p), "FSM", "--threshold", "2")
    assert code == 0 and rep["name"] == "FSM" and rep["closure_violations"] == 0
    from streamgpm.oracle import oracle_fsm

    assert len(rep["frequent"]) == len(oracle_fsm(g, 2, "mni"))


def test_kernel_spgemm_and_ttv(capsys, tmp_path):
    row = np.zeros((1, 8))
    row[0, [1, 3, 7]] = [45, 21, 13]
    col = np.zeros((8, 1))
    col[[2, 5, 7], 0] = [14, 36, 2]
    (tmp_path / "a.mtx").write_text(dump_matrix(SparseMatrix.from_dense(row)))
    (tmp_path / "b.mtx").write_text(dump_matrix(SparseMatrix.from_dense(col)))
    code, rep, _ = run(capsys, "kernel", "spgemm", str(tmp_path / "a.mtx"), str(tmp_path / "b.mtx"), "--timing")
    assert code == 0 and rep["result"]["entries"] == [[0, 0, 26.0]] and rep["stats"]["vinter_pairs"] == 1
    t = random_sparse_tensor((4, 5, 6), 0.2, seed=1)
    (tmp_path / "t.tns").write_text(dump_tensor(t))
    (tmp_path / "v.txt").write_text(" ".join(map(str, np.arange(1.0, 7.0))))
    rep = run(capsys, "kernel", "ttv", str(tmp_path / "t.tns"), str(tmp_path / "v.txt"))[1]
    got = np.zeros((4, 5))
    for i, j, x in rep["result"]["entries"]:
        got[i, j] = x
    np.testing.assert_allclose(got, dense_reference(t, np.arange(1.0, 7.0), "ttv"), rtol=1e-9)


def test_sweep_order_and_trend(capsys, dense):
    code, reps, err = run(capsys, "sweep", dense, "T", "--axis", "ius", "--points", "4", "1", "2", "--jobs", "3")
    assert code == 0 and [r["point"] for r in reps] == [4, 1, 2]
    cyc = {r["point"]: r["stats"]["total_cycles"] for r in reps}
    assert cyc[1] >= cyc[2] >= cyc[4]
    assert len({r["count"] for r in reps}) == 1


def test_sweep_without_timing_is_usage_error(capsys, k4):
    assert run(capsys, "sweep", k4, "T", "--axis", "ius", "--no-timing")[0] == 2


@pytest.mark.parametrize("argv,code", [
    (["mine", "{k4}", "7C"], 2),
    (["mine", "/nonexistent/graph.txt", "T"], 3),
    (["mine", "{k4}", "FSM", "--threshold", "1"], 3),
    (["mine", "{k4}", "FSM"], 2),
    (["mine", "{k4}", "T", "--timing", "--set", "warp=1"], 2),
    (["frobnicate"], 2),
])
def test_exit_codes(capsys, k4, argv, code):
    assert run(capsys, *[a.replace("{k4}", k4) for a in argv])[0] == code


def test_bad_graph_is_data_error(capsys, tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("0 x\n")
    assert run(capsys, "mine", str(p), "T")[0] == 3


def test_hidden_oracle_verb(capsys, k4):
    code, rep, _ = run(capsys, "oracle", k4, "TT", "--quiet")
    assert code == 0 and rep["count"] == 12
    assert main(["--help"]) == 0
    assert "oracle" not in capsys.readouterr().out
