"""CSV/JSON artifact formats.

Floats are written with ``repr`` (shortest round-trip form), so reading an
artifact back reproduces the in-memory values bit for bit and two identical
runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .controller import EventLog
from .estimation import SampleTrace


def _fmt(x):
    return repr(float(x))


def write_series_csv(path, times, states, prefix="i"):
    states = np.asarray(states)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(["t"] + [f"{prefix}_{v}" for v in range(states.shape[1])]) + "\n")
        for t, row in zip(times, states):
            fh.write(",".join([_fmt(t)] + [repr(x) for x in row.tolist()]) + "\n")


def read_series_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, len(rows[0]))
    return data[:, 0], data[:, 1:]


def write_trajectory_csv(path, times, states):
    write_series_csv(path, times, states, "i")


def read_trajectory_csv(path):
    return read_series_csv(path)


def write_estimates_csv(path, times, estimates):
    write_series_csv(path, times, estimates, "ihat")


def write_events_csv(path, events):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("node,kind,time\n")
        for node, kind, t in events.rows():
            fh.write(f"{node},{kind},{_fmt(t)}\n")


def read_events_csv(path, n):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = [(int(r["node"]), r["kind"], float(r["time"])) for r in reader]
    return EventLog.from_rows(n, rows)


def write_sample_rle(path, trace):
    """One line per node: ``node first_bit run_length ...``."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# h={trace.h!r} seed={trace.seed} steps={trace.steps} nodes={trace.bits.shape[1]}\n")
        for v in range(trace.bits.shape[1]):
            first, lengths = trace.run_lengths(v)
            fh.write(" ".join(map(str, [v, first, *lengths])) + "\n")


def read_sample_rle(path):
    header, columns = {}, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            header = dict(item.split("=", 1) for item in line[1:].split())
            continue
        parts = [int(x) for x in line.split()]
        columns.append((parts[1], parts[2:]))
    seed = None if header.get("seed", "None") == "None" else int(header["seed"])
    return SampleTrace.from_run_lengths(columns, float(header["h"]), seed)


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
