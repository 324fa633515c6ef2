import numpy as np
import pytest

from streamgpm.graph import complete_graph, cycle_graph, erdos_renyi, path_graph, star_graph


def small_corpus():
    """Named small graphs shared by the count tests."""
    out = {f"K{n}": complete_graph(n) for n in (3, 4, 5)}
    out.update({"P6": path_graph(6), "S5": star_graph(5), "C6": cycle_graph(6)})
    return out


def dense_adjacency(g) -> np.ndarray:
    n = g.num_vertices
    a = np.zeros((n, n), dtype=np.int64)
    for u, v in g.edges():
        a[u, v] = a[v, u] = 1
    return a


@pytest.fixture(scope="session")
def er60():
    return erdos_renyi(60, 0.2, seed=3)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[str, str] = {}


def record_acceptance(key: str, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {key}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[key] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(k.split("(")[0].rstrip("abc")), k)):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
