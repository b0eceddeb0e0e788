"""Cost and effectiveness of the true-state controller as the lower threshold L varies.

    python scripts/sweep_L.py --L 0.01 0.1 0.25 0.5 0.75 0.9 --seed 0
"""

import argparse

from cyberswitch.config import RunConfig
from cyberswitch.controller import compute_scaling, run_control
from cyberswitch.metrics import report_for_run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=float, nargs="+", default=[0.01, 0.1, 0.25, 0.5, 0.75, 0.9])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--T", type=float, default=100.0)
    args = ap.parse_args()

    base = RunConfig(seed=args.seed, T=args.T)
    graph = base.build_graph()
    i0 = base.initial_state(graph.n)
    scaling = compute_scaling(graph, base.beta_plus, base.iota)
    print("L,S_mean,effectiveness,cost_ratio,min_low_to_high_gap,low_gap_bound,total_events")
    for L in args.L:
        cfg = RunConfig(seed=args.seed, T=args.T, L=L)
        run = run_control(graph, cfg.switching, i0, scaling)
        rep = report_for_run(run, cfg.dt, cfg.t_burn)
        print(f"{L},{rep.S_mean:.5f},{rep.effectiveness:.5f},{rep.cost_ratio:.5f},"
              f"{rep.min_low_to_high_gap:.4f},{rep.low_gap_bound:.4f},{sum(rep.event_counts)}")


if __name__ == "__main__":
    main()
