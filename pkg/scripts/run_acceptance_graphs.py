"""Controlled runs on the seeded G(200, 6/199) graphs; one report row per seed.

    python scripts/run_acceptance_graphs.py --seeds 0 1 2 3 4 --out runs/acceptance
"""

import argparse
import time
from pathlib import Path

from cyberswitch.cli import execute
from cyberswitch.config import RunConfig
from cyberswitch.graph import precontrol_check
from cyberswitch.controller import check_m_matrix
from cyberswitch.metrics import RunReport


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--T", type=float, default=100.0)
    ap.add_argument("--gamma-max", type=float, default=0.005)
    ap.add_argument("--out", type=Path, default=Path("runs/acceptance"))
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    print("seed,lambda_A,precontrol_margin,m_matrix_margin,seconds," + RunReport.csv_header())
    for seed in args.seeds:
        cfg = RunConfig(mode="control", seed=seed, T=args.T, gamma_max=args.gamma_max)
        graph = cfg.build_graph()
        pre = precontrol_check(graph, cfg.beta_minus)
        mm = check_m_matrix(graph, cfg.beta_plus, cfg.iota)
        start = time.perf_counter()
        report = execute(cfg, args.out / f"seed{seed}", workers=args.threads)
        elapsed = time.perf_counter() - start
        print(f"{seed},{pre.lambda_max:.4f},{pre.margin:.4f},{mm.margin:.4f},{elapsed:.2f},{report.csv_row()}")


if __name__ == "__main__":
    main()
