"""Compare the compiled and pure-Python merge kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--size N]

Both backends are imported directly, so the result does not depend on
STREAMGPM_PURE_PYTHON. Every timed call is also checked for equal output.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from streamgpm.graph import erdos_renyi
from streamgpm.kernels import UNBOUNDED, _pykernels

try:
    from streamgpm.kernels import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _cases(size: int, seed: int = 7):
    rng = np.random.default_rng(seed)
    a = np.unique(rng.integers(0, 8 * size, size)).astype(np.uint32)
    b = np.unique(rng.integers(0, 8 * size, size)).astype(np.uint32)
    av = rng.random(len(a))
    bv = rng.random(len(b))
    g = erdos_renyi(300, 0.1, seed=seed)
    s = g.neighbors(0).astype(np.uint32)
    return {
        "intersect": lambda m: m.intersect(a, b, UNBOUNDED, True),
        "subtract": lambda m: m.subtract(a, b, UNBOUNDED, True),
        "intersect_count": lambda m: m.intersect(a, b, UNBOUNDED, False),
        "vinter_mac": lambda m: m.vinter(a, av, b, bv, 0),
        "nested": lambda m: m.nested(s, g.indptr, g.csr_edges, g.csr_bound_offset),
    }


def _same(x, y) -> bool:
    if isinstance(x, tuple):
        return all(_same(p, q) for p, q in zip(x, y))
    if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
        return np.array_equal(np.asarray(x), np.asarray(y))
    return x == y


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--size", type=int, default=2000)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled backend not built; run `pip install -e . --no-build-isolation` first")
        return
    print(f"{'kernel':<16}{'python us':>12}{'cython us':>12}{'speedup':>10}")
    for name, call in _cases(args.size).items():
        if not _same(call(_pykernels), call(_ckernels)):
            raise SystemExit(f"backends disagree on {name}")
        py = min(timeit.repeat(lambda: call(_pykernels), number=args.repeat // 10 or 1, repeat=3))
        cy = min(timeit.repeat(lambda: call(_ckernels), number=args.repeat, repeat=3))
        py_us = py / (args.repeat // 10 or 1) * 1e6
        cy_us = cy / args.repeat * 1e6
        print(f"{name:<16}{py_us:>12.1f}{cy_us:>12.1f}{py_us / cy_us:>9.1f}x")


if __name__ == "__main__":
    main()
