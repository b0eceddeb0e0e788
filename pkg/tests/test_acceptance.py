"""Acceptance criteria, each run at its stated tolerance.

Every test prints one PASS/FAIL line; the lines are collected again in the
"acceptance criteria" section of the pytest summary.  Run on its own with

    pytest tests/test_acceptance.py -v
"""

import math
import time

import numpy as np
import pytest

from cyberswitch.cli import main
from cyberswitch.controller import Mode, SwitchingConfig, compute_scaling, check_m_matrix, run_control
from cyberswitch.dynamics import ModelParams, integrate
from cyberswitch.estimation import (
    EstimatorConfig,
    SampleTrace,
    UniformStream,
    run_control_sampled,
    sample_state,
    window_estimate,
)
from cyberswitch.graph import AttackDefenseGraph, precontrol_check
from cyberswitch.metrics import gap_stats, report_for_run

from conftest import ACCEPTANCE_SEEDS, acceptance_setup, random_graph, record_criterion


@pytest.fixture(scope="module")
def controlled_runs(acceptance_graphs):
    out = {}
    for seed, (cfg, graph, i0) in acceptance_graphs.items():
        start = time.perf_counter()
        run = run_control(graph, cfg.switching, i0)
        elapsed = time.perf_counter() - start
        out[seed] = (run, report_for_run(run, cfg.dt, cfg.t_burn), elapsed)
    return out


def test_setup_margins(acceptance_graphs):
    """The synthetic graphs satisfy both feasibility checks with margin >= 0.1."""
    for cfg, graph, _ in acceptance_graphs.values():
        assert precontrol_check(graph, cfg.beta_minus).margin >= 0.1
        assert check_m_matrix(graph, cfg.beta_plus, cfg.iota).margin >= 0.1


def test_criterion_1_effectiveness(controlled_runs):
    eff = {s: rep.effectiveness for s, (_, rep, _) in controlled_runs.items()}
    slowest = max(t for _, _, t in controlled_runs.values())
    ok = all(e < 0.10 for e in eff.values()) and slowest < 10.0
    detail = "effectiveness " + ", ".join(f"s{s}={e:.4f}" for s, e in eff.items())
    record_criterion(1, ok, f"{detail} (gate < 0.10); slowest run {slowest:.2f}s (< 10s)")
    assert ok


def test_criterion_2_cost(controlled_runs):
    cost = {s: rep.cost_ratio for s, (_, rep, _) in controlled_runs.items()}
    ok = all(c <= 0.60 for c in cost.values())
    record_criterion(2, ok, "cost_ratio " + ", ".join(f"s{s}={c:.4f}" for s, c in cost.items()) + " (gate <= 0.60)")
    assert ok


def test_criterion_3_zeno_free(controlled_runs):
    cfg = SwitchingConfig()
    bound = cfg.low_gap_bound - cfg.h
    max_events = cfg.max_events_per_node()
    gap_bad = count_bad = 0
    min_gap, most = math.inf, 0
    for run, _, _ in controlled_runs.values():
        gaps = gap_stats(run.events).low_to_high
        gap_bad += int(np.count_nonzero(gaps < bound))
        if gaps.size:
            min_gap = min(min_gap, float(gaps.min()))
        counts = run.events.counts()
        count_bad += int(np.count_nonzero(counts > max_events))
        most = max(most, int(counts.max()))
    ok = gap_bad == 0 and count_bad == 0
    record_criterion(
        3, ok,
        f"min low->high gap {min_gap:.4f} >= {bound:.5f} ({gap_bad} violations); "
        f"max events/node {most} <= {max_events:.2f} ({count_bad} violations)",
    )
    assert ok


def test_criterion_4_envelope(controlled_runs):
    cfg = SwitchingConfig()
    tol = cfg.h * (cfg.beta_plus + 1)
    worst = max(float(run.envelope_excess.max()) for run, _, _ in controlled_runs.values())
    violations = sum(int(np.count_nonzero(run.envelope_excess > tol)) for run, _, _ in controlled_runs.values())
    ok = violations == 0
    record_criterion(4, ok, f"max (i/p - phi_up) after first low event {worst:.5f} <= {tol:.4f} ({violations} violations)")
    assert ok


def test_criterion_5_scaling_vector():
    rng = np.random.default_rng(20240501)
    beta_plus, iota = 0.8, 0.5
    worst_slack, worst_rel = -math.inf, 0.0
    graphs = 0
    while graphs < 20:
        n = int(rng.integers(2, 51))
        g = random_graph(rng, n, float(rng.uniform(0.02, 0.3)), float(rng.uniform(0.01, 0.2)))
        if not check_m_matrix(g, beta_plus, iota):
            continue
        graphs += 1
        sv = compute_scaling(g, beta_plus, iota)
        worst_slack = max(worst_slack, float(sv.lemma_slack(g, beta_plus, iota).max()))
        J = (beta_plus - iota) * np.eye(n) - g.gamma_matrix().toarray()
        dense = np.linalg.solve(J, np.ones(n))
        dense /= dense.min()
        worst_rel = max(worst_rel, float(np.abs(sv.p - dense).max() / np.abs(dense).max()))
    ok = worst_slack < -1e-8 and worst_rel < 1e-8
    record_criterion(5, ok, f"20 graphs: max slack {worst_slack:.4g} < -1e-8; max rel. diff vs dense solve {worst_rel:.2e} < 1e-8")
    assert ok


def test_criterion_6_integrator(acceptance_graphs):
    # the free-running comparison uses the low-cost recovery rate beta_minus,
    # the regime whose stability the pre-control check certifies
    gaps, gaps_plus = [], []
    for cfg, graph, i0 in acceptance_graphs.values():
        params = ModelParams.uniform(graph.n, beta=cfg.beta_minus)
        e = integrate(graph, params, i0, cfg.h, cfg.T, record_stride=1).states
        r = integrate(graph, params, i0, cfg.h, cfg.T, method="rk4", record_stride=1).states
        gaps.append(float(np.abs(e - r).max()))
        params = ModelParams.uniform(graph.n, beta=cfg.beta_plus)
        e = integrate(graph, params, i0, cfg.h, cfg.T, record_stride=1).states
        r = integrate(graph, params, i0, cfg.h, cfg.T, method="rk4", record_stride=1).states
        gaps_plus.append(float(np.abs(e - r).max()))
    iso = AttackDefenseGraph.from_edges(1, [])
    beta = 0.1
    final = integrate(iso, ModelParams.uniform(1, beta=beta), [1.0], 0.025, 10.0).final[0]
    rel = abs(final - math.exp(-beta * 10.0)) / math.exp(-beta * 10.0)
    ok = max(gaps) < 1e-3 and rel < 2e-2
    record_criterion(
        6, ok,
        f"Euler-RK4 max gap at beta_minus {max(gaps):.2e} < 1e-3 "
        f"(at beta_plus, informational: {max(gaps_plus):.2e}); isolated node rel. error at T=10 {rel:.2e} < 2e-2",
    )
    assert ok


def test_criterion_7_estimator_concentration():
    h, samples = 0.025, 1200
    W = samples * h
    results = {}
    for p in (0.1, 0.3, 0.7):
        tol = 4 * math.sqrt(p * (1 - p) / samples)
        hits = 0
        for trial in range(100):
            stream = UniformStream(1, seed=1000 + trial)
            draws = np.array([stream.next_row() for _ in range(samples)])
            trace = SampleTrace(sample_state(np.full((samples, 1), p), draws), h)
            est = window_estimate(trace, 0, (samples - 1) * h, W)
            assert est.samples == samples and not est.partial
            hits += abs(est.value - p) <= tol
        results[p] = hits
    ok = all(v >= 99 for v in results.values())
    record_criterion(7, ok, "trials within 4 sigma: " + ", ".join(f"p={p}: {v}/100" for p, v in results.items()) + " (gate >= 99)")
    assert ok


def test_criterion_8_oracle_reduction(acceptance_graphs, controlled_runs):
    same = {}
    for seed, (cfg, graph, i0) in acceptance_graphs.items():
        run = run_control_sampled(graph, cfg.switching, EstimatorConfig(mode="oracle"), i0, seed=cfg.seeds()["samples"])
        base = controlled_runs[seed][0]
        same[seed] = run.events == base.events and run.norm_l1.tobytes() == base.norm_l1.tobytes()
    ok = all(same.values())
    record_criterion(8, ok, "oracle-estimator event log identical to run_control: " + ", ".join(f"s{s}={v}" for s, v in same.items()))
    assert ok


def test_criterion_9_adaptive_vs_fixed():
    T = 500.0
    eff, late = {}, {}
    for seed in ACCEPTANCE_SEEDS:
        cfg, graph, i0 = acceptance_setup(seed, T=T)
        scaling = compute_scaling(graph, cfg.beta_plus, cfg.iota)
        for mode in ("fixed_window", "adaptive_window"):
            est = EstimatorConfig(W=30.0, C0=3.0, mode=mode)
            run = run_control_sampled(graph, cfg.switching, est, i0, scaling, seed=cfg.seeds()["samples"], record_stride=400)
            eff[seed, mode] = report_for_run(run, cfg.dt, cfg.t_burn).effectiveness
            if mode == "adaptive_window":
                late[seed] = sum(
                    1 for times in run.events.times for t in times if 0.6 * T <= t <= T
                )
    wins = sum(eff[s, "adaptive_window"] < eff[s, "fixed_window"] for s in ACCEPTANCE_SEEDS)
    has_late = all(v > 0 for v in late.values())
    ok = wins >= 4 and has_late
    detail = ", ".join(
        f"s{s}: adaptive {eff[s, 'adaptive_window']:.4f} / fixed {eff[s, 'fixed_window']:.4f}" for s in ACCEPTANCE_SEEDS
    )
    record_criterion(
        9, ok,
        f"adaptive better on {wins}/5 seeds (gate >= 4) [{detail}]; "
        f"adaptive events in [0.6T, T] per seed {list(late.values())} (gate > 0 each)",
    )
    assert ok


def test_criterion_10_determinism(tmp_path):
    config = tmp_path / "run.json"
    config.write_text('{"seed": 2, "T": 100.0, "record_stride": 4}')
    identical = {}
    for command in ("control", "control-sampled"):
        outs = []
        for threads in (1, 1, 4):
            out = tmp_path / f"{command}-{len(outs)}"
            assert main([command, "--config", str(config), "--out", str(out), "--threads", str(threads)]) == 0
            outs.append(out)
        identical[command] = all(
            (outs[0] / name).read_bytes() == (o / name).read_bytes()
            for o in outs[1:] for name in ("trajectory.csv", "events.csv")
        )
    ok = all(identical.values())
    record_criterion(10, ok, "byte-identical trajectory.csv/events.csv across reruns and --threads 1/4: " + str(identical))
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
