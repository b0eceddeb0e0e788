"""Command-line entry point.

    cyberswitch simulate --config run.json --out runs/a
    cyberswitch control --config run.json --out runs/b --threads 4
    cyberswitch control-sampled --config run.json --out runs/c --seed 7
    cyberswitch metrics --out runs/b

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
infeasibility.  Errors are also written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import artifacts
from .config import RunConfig
from .controller import EventLog, Mode, run_control
from .dynamics import ModelParams, integrate
from .errors import ConfigError, CyberSwitchError, EdgeListError, EmptyGraphError, InfeasibleError
from .estimation import run_control_sampled
from .metrics import RunReport, build_report, report_for_run

log = logging.getLogger("cyberswitch")

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 2, 3


def _simulate(cfg, graph, i0, workers):
    beta = cfg.beta if cfg.beta is not None else cfg.beta_plus
    params = ModelParams.uniform(graph.n, beta=beta, alpha=cfg.alpha)
    traj = integrate(graph, params, i0, cfg.h, cfg.T, record_stride=cfg.record_stride, workers=workers)
    # a fixed-beta run is the classical approach: all high cost when beta >= beta_plus
    events = EventLog(graph.n)
    kind = Mode.HIGH if beta >= cfg.beta_plus else Mode.LOW
    for v in range(graph.n):
        events.add(v, kind, 0.0)
    grid = np.arange(traj.norm_l1.size) * cfg.h
    report = build_report(grid, traj.norm_l1, events, cfg.switching, cfg.dt, cfg.t_burn,
                          clamp_count=traj.clamp_count)
    return traj.times, traj.states, None, report


def execute(cfg, out_dir, workers=1, base_dir=None):
    """Run ``cfg`` and write every artifact into ``out_dir``; returns the report."""
    cfg.validate()
    if base_dir is not None:
        # the echoed config must be runnable from anywhere
        for key in ("graph_path", "i0_path"):
            value = getattr(cfg, key)
            if value and not Path(value).is_absolute():
                setattr(cfg, key, str((Path(base_dir) / value).resolve()))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    graph = cfg.build_graph()
    i0 = cfg.initial_state(graph.n)
    artifacts.write_json(out / "config.json", cfg.to_dict())

    if cfg.mode == "simulate":
        times, states, _, report = _simulate(cfg, graph, i0, workers)
    elif cfg.mode == "control":
        run = run_control(graph, cfg.switching, i0, record_stride=cfg.record_stride, workers=workers)
        times, states = run.times, run.states
        artifacts.write_events_csv(out / "events.csv", run.events)
        report = report_for_run(run, cfg.dt, cfg.t_burn)
    else:
        run = run_control_sampled(
            graph, cfg.switching, cfg.estimator_config, i0,
            seed=cfg.seeds()["samples"], record_stride=cfg.record_stride, workers=workers,
        )
        times, states = run.times, run.states
        artifacts.write_events_csv(out / "events.csv", run.events)
        artifacts.write_estimates_csv(out / "estimates.csv", run.extras["estimate_times"], run.extras["estimates"])
        artifacts.write_sample_rle(out / "samples.rle", run.extras["trace"])
        report = report_for_run(run, cfg.dt, cfg.t_burn)

    artifacts.write_trajectory_csv(out / "trajectory.csv", times, states)
    _write_report(out, report)
    return report


def _write_report(out, report):
    (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    (out / "report.csv").write_text(RunReport.csv_header() + "\n" + report.csv_row() + "\n", encoding="utf-8")


def recompute_metrics(out_dir):
    """Rebuild ``report.json`` from the stored config, trajectory and events."""
    out = Path(out_dir)
    cfg = RunConfig.from_dict(artifacts.read_json(out / "config.json"))
    times, states = artifacts.read_trajectory_csv(out / "trajectory.csv")
    n = states.shape[1]
    events_path = out / "events.csv"
    if events_path.exists():
        events = artifacts.read_events_csv(events_path, n)
    else:
        beta = cfg.beta if cfg.beta is not None else cfg.beta_plus
        events = EventLog(n)
        for v in range(n):
            events.add(v, Mode.HIGH if beta >= cfg.beta_plus else Mode.LOW, 0.0)
    norms = np.array([row.sum() for row in states])
    extra = {}
    if cfg.mode == "control_sampled":
        extra["estimator_mode"] = cfg.estimator_config.mode
    report = build_report(times, norms, events, cfg.switching, cfg.dt, cfg.t_burn, **extra)
    _write_report(out, report)
    return report


def _parser():
    p = argparse.ArgumentParser(prog="cyberswitch", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("simulate", "control", "control-sampled"):
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, type=Path)
        s.add_argument("--out", required=True, type=Path)
        s.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")
        s.add_argument("--seed", type=int, default=None, help="override the config seed")
    m = sub.add_parser("metrics", help="recompute report.json from stored artifacts")
    m.add_argument("--out", required=True, type=Path)
    return p


def _fail(exc, code):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("check", "margin", "line_no"):
        if getattr(exc, attr, None) is not None:
            payload[attr] = getattr(exc, attr)
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        if args.command == "metrics":
            report = recompute_metrics(args.out)
        else:
            if args.threads < 1:
                raise ConfigError("--threads must be at least 1")
            try:
                data = json.loads(args.config.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from None
            cfg = RunConfig.from_dict(data)
            cfg.mode = args.command.replace("-", "_")
            if args.seed is not None:
                cfg.seed = args.seed
            with warnings.catch_warnings():
                warnings.simplefilter("default")
                report = execute(cfg, args.out, workers=args.threads, base_dir=args.config.parent)
    except InfeasibleError as exc:
        return _fail(exc, EXIT_INFEASIBLE)
    except (ConfigError, EdgeListError, EmptyGraphError, CyberSwitchError, FileNotFoundError) as exc:
        return _fail(exc, EXIT_CONFIG)
    log.info("S_mean=%.4f effectiveness=%.4f cost_ratio=%.4f",
             report.S_mean, report.effectiveness, report.cost_ratio)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
