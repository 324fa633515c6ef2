import io

import numpy as np
import pytest

from streamgpm.graph import (
    EOS,
    GraphFormatError,
    SparseMatrix,
    SparseTensor,
    VertexRangeError,
    complete_graph,
    dump_edge_list,
    dump_matrix,
    dump_tensor,
    erdos_renyi,
    load_labels,
    load_matrix,
    load_tensor,
    parse_edge_list,
    random_sparse_matrix,
    random_sparse_tensor,
)


def test_csr_is_sorted_symmetric_and_deduplicated():
    g = parse_edge_list("# comment\n0 1\n1 0\n2 1\n0 2\n0 2\n3 3\n")
    assert g.num_vertices == 4
    assert g.num_undirected_edges == 3
    assert g.neighbors(0).tolist() == [1, 2]
    assert g.neighbors(1).tolist() == [0, 2]
    assert g.degree(3) == 0
    for v in range(g.num_vertices):
        nb = g.neighbors(v)
        assert np.all(np.diff(nb.astype(np.int64)) > 0)


def test_bound_offset_splits_neighbors_at_self():
    g = complete_graph(5)
    for v in range(5):
        assert g.lower_neighbors(v).tolist() == list(range(v))
        assert int(g.csr_bound_offset[v]) == v


def test_ids_are_compacted_in_numeric_order():
    g = parse_edge_list("10 30\n30 20\n")
    assert g.num_vertices == 3
    assert g.original_ids.tolist() == [10, 20, 30]
    assert g.has_edge(0, 2) and g.has_edge(1, 2) and not g.has_edge(0, 1)


@pytest.mark.parametrize("text", ["0\n", "a b\n", "-1 2\n"])
def test_malformed_edge_lists_raise(text):
    with pytest.raises(GraphFormatError):
        parse_edge_list(text)


def test_vertex_id_colliding_with_sentinel():
    with pytest.raises(VertexRangeError):
        parse_edge_list(f"0 {EOS}\n")


def test_labels_inline_and_sidecar():
    g = parse_edge_list("0 1\n1 2\nlabel 0 5\nlabel 1 6\nlabel 2 5\n")
    assert g.labels.tolist() == [5, 6, 5]
    side = load_labels(io.StringIO("0 1\nlabel 1 2\n2 3\n"))
    h = parse_edge_list("0 1\n1 2\n").with_labels(side)
    assert h.labels.tolist() == [1, 2, 3]
    with pytest.raises(GraphFormatError):
        parse_edge_list("0 1\nlabel 0 1\n")


def test_edge_list_round_trip():
    g = erdos_renyi(40, 0.2, seed=1, num_labels=3)
    assert parse_edge_list(dump_edge_list(g)) == g


def test_erdos_renyi_is_deterministic():
    assert erdos_renyi(50, 0.1, seed=9) == erdos_renyi(50, 0.1, seed=9)
    assert erdos_renyi(50, 0.1, seed=9) != erdos_renyi(50, 0.1, seed=10)


def test_sparse_matrix_formats_agree():
    m = random_sparse_matrix(30, 20, 0.1, seed=2)
    dense = m.to_dense()
    for i in range(30):
        k, v = m.row(i)
        assert np.array_equal(np.flatnonzero(dense[i]), k)
        assert np.allclose(dense[i, k], v)
    for j in range(20):
        k, v = m.col(j)
        assert np.array_equal(np.flatnonzero(dense[:, j]), k)
    assert np.array_equal(SparseMatrix.from_dense(dense).to_dense(), dense)


def test_matrix_market_round_trip_and_symmetric():
    m = random_sparse_matrix(8, 6, 0.3, seed=4)
    back = load_matrix(io.StringIO(dump_matrix(m)))
    assert np.array_equal(back.to_dense(), m.to_dense())
    sym = load_matrix(io.StringIO("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 3.5\n"))
    assert sym.to_dense().tolist() == [[0.0, 3.5], [3.5, 0.0]]
    with pytest.raises(GraphFormatError):
        load_matrix(io.StringIO("1 1 1\n"))


def test_tensor_csf_and_frostt_round_trip():
    t = random_sparse_tensor((6, 5, 7), 0.1, seed=3)
    dense = t.to_dense()
    assert np.array_equal(SparseTensor.from_dense(dense).to_dense(), dense)
    back = load_tensor(io.StringIO(dump_tensor(t)), shape=(6, 5, 7))
    assert np.array_equal(back.to_dense(), dense)
    for i, j, keys, vals in t.fibers():
        assert np.array_equal(np.flatnonzero(dense[i, j]), keys)
