import numpy as np
import pytest
from hypothesis import strategies as st

from cyberswitch.config import RunConfig
from cyberswitch.graph import AttackDefenseGraph

ACCEPTANCE_SEEDS = (0, 1, 2, 3, 4)


def acceptance_setup(seed, T=100.0):
    """Synthetic directed G(200, 6/199) graph, gammas and i0 as the CLI builds them."""
    cfg = RunConfig(seed=seed, T=T)
    graph = cfg.build_graph()
    return cfg, graph, cfg.initial_state(graph.n)


@pytest.fixture(scope="session")
def acceptance_graphs():
    return {s: acceptance_setup(s) for s in ACCEPTANCE_SEEDS}


@st.composite
def small_graphs(draw, max_n=12, max_gamma=1.0):
    n = draw(st.integers(min_value=1, max_value=max_n))
    pairs = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
    edges = draw(st.lists(pairs, max_size=3 * n))
    gammas = draw(
        st.lists(
            st.floats(min_value=1e-3, max_value=max_gamma, allow_nan=False),
            min_size=len(edges),
            max_size=len(edges),
        )
    )
    return AttackDefenseGraph.from_edges(n, edges, gamma=np.array(gammas, dtype=float))


def random_graph(rng, n, p, gamma_max):
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    u, v = np.nonzero(mask)
    return AttackDefenseGraph.from_edges(n, zip(u, v), gamma=gamma_max * (1 - rng.random(u.size)))


ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
