import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from streamgpm import kernels as K
from streamgpm.graph import EOS, complete_graph, erdos_renyi
from streamgpm.kernels import _pykernels

try:
    from streamgpm.kernels import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

sorted_keys = st.lists(st.integers(0, 200), max_size=60).map(lambda xs: sorted(set(xs)))


def test_intersect_examples():
    assert K.intersect([1, 3, 5, 7], [3, 4, 5, 8]).tolist() == [3, 5]
    assert K.intersect([1, 3, 5, 7], [3, 4, 5, 8], bound=5).tolist() == [3]
    assert K.intersect([], [1, 2]).tolist() == []
    assert K.intersect_count([1, 2, 3], [1, 2, 3], bound=-1) == 3


def test_subtract_examples():
    assert K.subtract([1, 3, 5, 7], [3, 4, 5, 8]).tolist() == [1, 7]
    assert K.subtract([1, 3, 5, 7], [3], bound=6).tolist() == [1, 5]
    assert K.subtract_count([2, 4], []) == 2


def test_vinter_worked_example():
    # two sparse vectors whose only common key is 7: 13 * 2
    a = [(1, 45.0), (3, 21.0), (7, 13.0)]
    b = [(2, 14.0), (5, 36.0), (7, 2.0)]
    assert K.vinter(a, b, "MAC") == 26.0
    assert K.vinter(a, b, "MAX") == 13.0
    assert K.vinter(a, b, "MIN") == 2.0


def test_fetch_past_end_returns_sentinel():
    assert K.fetch(np.array([4, 9], dtype=np.uint32), 1) == 9
    assert K.fetch(np.array([4, 9], dtype=np.uint32), 2) == EOS
    with pytest.raises(ValueError):
        K.fetch([1], -1)


def test_nested_count_on_clique():
    g = complete_graph(5)
    s = np.arange(5, dtype=np.uint32)
    # each s_i contributes |{s_j < s_i}| = i; 0+1+2+3+4
    assert K.nested_intersect_count(s, g) == 10


def test_merge_stats_read_counts_bounded():
    m = K.intersect_stats([1, 2, 3, 10, 11], [2, 3, 4, 12], bound=4)
    assert m.out.tolist() == [2, 3]
    assert m.read_a <= 5 and m.read_b <= 4
    assert m.comparisons >= 3


@settings(max_examples=200, deadline=None)
@given(sorted_keys, sorted_keys, st.one_of(st.none(), st.integers(0, 220)))
def test_bounded_equals_filtered_unbounded(a, b, bound):
    full = set(a) & set(b)
    want = sorted(x for x in full if bound is None or x < bound)
    assert K.intersect(a, b, bound).tolist() == want
    sub = sorted(x for x in set(a) - set(b) if bound is None or x < bound)
    assert K.subtract(a, b, bound).tolist() == sub


@settings(max_examples=200, deadline=None)
@given(sorted_keys, sorted_keys)
def test_intersection_commutes_and_is_small(a, b):
    ab = K.intersect(a, b)
    assert ab.tolist() == K.intersect(b, a).tolist()
    assert len(ab) <= min(len(a), len(b))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_nested_matches_defining_sum(seed):
    g = erdos_renyi(30, 0.3, seed=seed)
    v = seed % 30
    s = g.neighbors(v)
    want = sum(K.intersect_count(s, g.neighbors(int(x)), int(x)) for x in s)
    assert K.nested_intersect_count(s, g) == want


@pytest.mark.skipif(_ckernels is None, reason="compiled backend not built")
@settings(max_examples=150, deadline=None)
@given(sorted_keys, sorted_keys, st.integers(0, 220), st.lists(st.floats(-5, 5), min_size=60, max_size=60))
def test_backends_agree(a, b, bound, vals):
    ka = np.asarray(a, dtype=np.uint32)
    kb = np.asarray(b, dtype=np.uint32)
    for fn in ("intersect", "subtract"):
        p = getattr(_pykernels, fn)(ka, kb, bound, True)
        c = getattr(_ckernels, fn)(ka, kb, bound, True)
        assert np.array_equal(p[0], c[0]) and tuple(p[1:]) == tuple(c[1:])
    va = np.asarray(vals[: len(a)], dtype=np.float64)
    vb = np.asarray(vals[: len(b)], dtype=np.float64)
    for op in (0, 1, 2):
        p = _pykernels.vinter(ka, va, kb, vb, op)
        c = _ckernels.vinter(ka, va, kb, vb, op)
        assert p[0] == c[0] and tuple(p[1:5]) == tuple(c[1:5])
        assert np.array_equal(p[5], c[5]) and np.array_equal(p[6], c[6])


@pytest.mark.skipif(_ckernels is None, reason="compiled backend not built")
def test_backends_agree_on_nested():
    g = erdos_renyi(80, 0.2, seed=5)
    for v in range(0, 80, 7):
        s = g.neighbors(v).astype(np.uint32)
        p = _pykernels.nested(s, g.indptr, g.csr_edges, g.csr_bound_offset)
        c = _ckernels.nested(s, g.indptr, g.csr_edges, g.csr_bound_offset)
        assert p[0] == c[0]
        for x, y in zip(p[1:], c[1:]):
            assert np.array_equal(x, y)


def test_backend_is_reported():
    assert K.BACKEND in ("cython", "python")


def test_environment_forces_pure_python_fallback():
    import subprocess
    import sys

    code = "from streamgpm import kernels; print(kernels.BACKEND, kernels.intersect_count([1, 2], [2, 3]))"
    out = subprocess.run([sys.executable, "-c", code], env={**__import__("os").environ, "STREAMGPM_PURE_PYTHON": "1"},
                         capture_output=True, text=True, check=True).stdout.split()
    assert out == ["python", "1"]
