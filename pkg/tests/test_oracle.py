"""Oracle checks against closed forms computed from the adjacency matrix."""
from math import comb

import numpy as np
import pytest

from conftest import dense_adjacency
from streamgpm.compiler import clique, star, tailed_triangle, triangle, wedge
from streamgpm.graph import complete_graph, erdos_renyi, star_graph
from streamgpm.oracle import (
    OracleSizeError,
    canonical_labeled,
    dense_reference,
    oracle_count,
    oracle_embeddings,
    oracle_fsm,
)
from streamgpm.graph import SparseMatrix, random_sparse_matrix, random_sparse_tensor


def test_small_examples():
    k4 = complete_graph(4)
    assert oracle_count(k4, triangle()) == 4
    assert oracle_count(k4, wedge("vertex")) == 0
    assert oracle_count(k4, tailed_triangle("edge")) == 12


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_counts_match_closed_forms(seed):
    g = erdos_renyi(40, 0.2, seed=seed)
    a = dense_adjacency(g)
    deg = a.sum(axis=1)
    tri = int(np.trace(a @ a @ a)) // 6
    per_vertex_tri = np.diag(a @ a @ a) // 2
    assert oracle_count(g, triangle()) == tri
    assert oracle_count(g, wedge("edge")) == sum(comb(int(d), 2) for d in deg)
    assert oracle_count(g, wedge("vertex")) == sum(comb(int(d), 2) for d in deg) - 3 * tri
    # a tailed triangle is a triangle plus a pendant edge at one of its corners
    assert oracle_count(g, tailed_triangle("edge")) == int(sum(per_vertex_tri * (deg - 2)))
    assert oracle_count(g, star(3, "edge")) == sum(comb(int(d), 3) for d in deg)


def test_four_clique_by_brute_force():
    g = erdos_renyi(25, 0.4, seed=8)
    a = dense_adjacency(g)
    n = 0
    for i in range(25):
        for j in range(i + 1, 25):
            if not a[i, j]:
                continue
            for k in range(j + 1, 25):
                if a[i, k] and a[j, k]:
                    n += int(sum(a[i, l] and a[j, l] and a[k, l] for l in range(k + 1, 25)))
    assert oracle_count(g, clique(4)) == n


def test_embeddings_materialize_with_matching_size():
    res = oracle_embeddings(complete_graph(4), triangle(), materialize=True)
    assert res.count == len(res.embeddings) == 4


def test_size_cap():
    with pytest.raises(OracleSizeError):
        oracle_count(erdos_renyi(50, 0.05, seed=1), triangle(), max_vertices=10)


def test_fsm_on_single_label_star():
    g = star_graph(3).with_labels(np.zeros(4, dtype=np.int64), by_original_id=False)
    edge = canonical_labeled(2, [(0, 1)], [0, 0])
    # every edge image set covers the centre and the three leaves under both orientations
    assert oracle_fsm(g, 1, "mni")[edge] == 4
    assert oracle_fsm(g, 1, "embedding")[edge] == 3


def test_fsm_min_image_is_downward_closed():
    from streamgpm.apps import downward_closure_audit

    g = erdos_renyi(20, 0.25, seed=4, num_labels=2)
    for t in (1, 2, 3):
        assert downward_closure_audit(oracle_fsm(g, t, "mni")) == []


def test_dense_reference():
    eye = SparseMatrix.from_dense(np.eye(2))
    assert np.array_equal(dense_reference(eye, eye, "spgemm"), np.eye(2))
    a = random_sparse_matrix(6, 5, 0.4, seed=1)
    b = random_sparse_matrix(5, 4, 0.4, seed=2)
    assert np.allclose(dense_reference(a, b, "spgemm"), a.to_dense() @ b.to_dense())
    t = random_sparse_tensor((3, 4, 5), 0.3, seed=3)
    v = np.arange(5.0)
    assert np.allclose(dense_reference(t, v, "ttv"), t.to_dense() @ v)
    with pytest.raises(ValueError):
        dense_reference(a, b, "conv")
