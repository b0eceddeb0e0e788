import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cyberswitch.errors import ConfigError, EdgeListError, EmptyGraphError
from cyberswitch.graph import (
    AttackDefenseGraph,
    assign_gammas,
    dump_edge_list,
    erdos_renyi,
    load_edge_list,
    precontrol_check,
    spectral_radius,
)

from conftest import small_graphs


def test_load_directed():
    g = load_edge_list("0 1\n1 2\n", directed=True)
    assert g.n == 3
    assert g.edges == [(0, 1), (1, 2)]
    assert g.in_neighbors == [[], [0], [1]]


def test_load_undirected_symmetrizes():
    g = load_edge_list("0 1\n", directed=False)
    assert sorted(g.edges) == [(0, 1), (1, 0)]


def test_self_loop_dropped():
    g = load_edge_list("0 0\n0 1\n")
    assert g.n == 2
    assert g.edges == [(0, 1)]


def test_comments_and_sparse_ids_are_remapped():
    text = "# Directed graph\n# FromNodeId\tToNodeId\n10\t30\n30 20\n\n10 30\n"
    g = load_edge_list(text)
    assert g.n == 3
    assert g.node_ids.tolist() == [10, 20, 30]
    assert sorted(g.edges) == [(0, 2), (2, 1)]  # duplicate 10->30 collapsed


@pytest.mark.parametrize(
    "text, line",
    [("0 1\n1 x\n", 2), ("0 1 2\n", 1), ("# c\n-1 2\n", 2), ("0\n", 1)],
)
def test_malformed_lines_report_line_number(text, line):
    with pytest.raises(EdgeListError) as err:
        load_edge_list(text)
    assert err.value.line_no == line


@pytest.mark.parametrize("text", ["", "# only comments\n", "3 3\n"])
def test_empty_edge_set(text):
    with pytest.raises(EmptyGraphError):
        load_edge_list(text)


def test_duplicate_keeps_first_gamma():
    g = AttackDefenseGraph.from_edges(2, [(0, 1), (0, 1)], gamma=[0.3, 0.7])
    assert g.m == 1
    assert g.gamma_of(0, 1) == 0.3


@settings(max_examples=60, deadline=None)
@given(small_graphs(), st.booleans())
def test_edge_list_round_trip(graph, directed):
    if not directed:
        graph = AttackDefenseGraph.from_edges(graph.n, graph.edges, directed=False)
    if graph.m == 0:
        return
    text = dump_edge_list(graph)
    again = load_edge_list(text, directed=directed)
    assert again.same_structure(graph)


def test_assign_gammas_range_and_determinism():
    g = erdos_renyi(80, 5, seed=3)
    a = assign_gammas(g, 0.002, seed=11)
    b = assign_gammas(g, 0.002, seed=11)
    assert np.all(a.gamma > 0) and np.all(a.gamma <= 0.002)
    assert a.gamma.tobytes() == b.gamma.tobytes()
    assert a.gamma_max == a.gamma.max()
    assert assign_gammas(g, 0.002, seed=12).gamma.tobytes() != a.gamma.tobytes()


def test_assign_gammas_single_edge_full_range():
    g = assign_gammas(load_edge_list("0 1\n"), 1.0, seed=0)
    assert 0 < g.gamma[0] <= 1


def test_assign_gammas_undirected_is_symmetric():
    g = assign_gammas(erdos_renyi(40, 4, seed=1, directed=False), 0.1, seed=5)
    for (u, v), gam in zip(g.edges, g.gamma):
        assert g.gamma_of(v, u) == gam


@pytest.mark.parametrize("gmax", [0.0, -0.1, 1.5])
def test_assign_gammas_rejects_range(gmax):
    with pytest.raises(ConfigError):
        assign_gammas(load_edge_list("0 1\n"), gmax, seed=0)


def test_spectral_cycle():
    n = 7
    g = AttackDefenseGraph.from_edges(n, [(k, (k + 1) % n) for k in range(n)])
    rep = spectral_radius(g.adjacency())
    assert rep.converged
    assert abs(rep.lambda_max - 1) <= 1e-8


def test_spectral_complete_graph():
    g = AttackDefenseGraph.from_edges(5, [(u, v) for u in range(5) for v in range(5)])
    rep = spectral_radius(g.adjacency())
    assert abs(rep.lambda_max - 4) <= 1e-8
    assert rep.residual <= 1e-8


def test_spectral_zero_and_acyclic():
    assert spectral_radius(np.zeros((4, 4))).lambda_max == 0.0
    dag = AttackDefenseGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    assert spectral_radius(dag.adjacency()).lambda_max == 0.0


def test_spectral_flags_nonconvergence():
    n = 60  # long cycle converges slowly under the shift
    g = AttackDefenseGraph.from_edges(n, [(k, (k + 1) % n) for k in range(n)])
    rep = spectral_radius(g.adjacency(), max_iter=5)
    assert not rep.converged
    assert rep.upper_bound >= 1 - 1e-12


@settings(max_examples=80, deadline=None)
@given(small_graphs(max_n=20))
def test_spectral_matches_dense_eigen(graph):
    A = graph.gamma_matrix().toarray()
    expected = np.abs(np.linalg.eigvals(A)).max() if graph.n else 0.0
    rep = spectral_radius(A)
    assert rep.converged
    assert rep.lambda_max == pytest.approx(expected, abs=1e-6)
    assert rep.upper_bound >= expected - 1e-9


def test_spectral_matches_eigen_on_random_50_node_graphs():
    rng = np.random.default_rng(0)
    for _ in range(10):
        A = (rng.random((50, 50)) < 0.08).astype(float)
        np.fill_diagonal(A, 0)
        expected = np.abs(np.linalg.eigvals(A)).max()
        assert spectral_radius(A).lambda_max == pytest.approx(expected, abs=1e-6)


def test_precontrol_published_parameter_sets():
    g = AttackDefenseGraph.from_edges(2, [(0, 1)], gamma=0.002)
    rep = precontrol_check(g, 0.1, lambda_max=45.6167)
    assert rep and rep.ratio == pytest.approx(50.0)
    g = AttackDefenseGraph.from_edges(2, [(0, 1)], gamma=0.013)
    rep = precontrol_check(g, 0.1, lambda_max=4.7395)
    assert rep and rep.ratio == pytest.approx(7.6923, abs=1e-4)


def test_precontrol_fails_on_k5():
    g = AttackDefenseGraph.from_edges(5, [(u, v) for u in range(5) for v in range(5)], gamma=0.5)
    rep = precontrol_check(g, 0.01)
    assert not rep
    assert rep.lambda_max == pytest.approx(4.0, abs=1e-8)
    assert rep.ratio == pytest.approx(0.02)


def test_acceptance_graphs_pass_checks_with_margin(acceptance_graphs):
    from cyberswitch.controller import check_m_matrix

    for cfg, graph, _ in acceptance_graphs.values():
        pre = precontrol_check(graph, cfg.beta_minus)
        mm = check_m_matrix(graph, cfg.beta_plus, cfg.iota)
        assert pre.margin >= 0.1
        assert mm.margin >= 0.1
        assert math.isclose(graph.gamma_max, graph.gamma.max())
