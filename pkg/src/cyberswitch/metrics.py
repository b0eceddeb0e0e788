"""Evaluation quantities for controlled runs: speed index, cost, dwell gaps."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .controller import Mode

FLOOR = 1e-14


def speed_index(i_t, i_t_dt, dt):
    """Empirical exponential decay rate ``-ln(i(t + dt) / i(t)) / dt``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if i_t <= 0 or i_t_dt <= 0:
        raise ValueError("speed index is undefined for nonpositive values")
    return -math.log(i_t_dt / i_t) / dt


@dataclass
class SpeedSummary:
    mean: float
    values: np.ndarray = field(repr=False)
    window_starts: np.ndarray = field(repr=False)
    floored: int  # windows dropped because an endpoint fell below the floor
    dt: float
    t_burn: float


def mean_speed_index(times, series, dt=1.0, t_burn=5.0, floor=FLOOR):
    """Average of the speed index over consecutive windows of length ``dt``.

    ``times`` must be a uniform grid whose spacing divides ``dt``.  Windows
    start at ``t_burn``; any window with an endpoint below ``floor`` is
    skipped and counted.
    """
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    if times.size < 2:
        raise ValueError("need at least two samples")
    step = times[1] - times[0]
    stride = int(round(dt / step))
    if stride < 1 or abs(stride * step - dt) > 1e-9 * max(1.0, dt):
        raise ValueError(f"dt={dt} is not a multiple of the sample spacing {step}")
    start = int(math.ceil(t_burn / step - 1e-9))
    idx = np.arange(start, times.size - stride, stride)
    a, b = series[idx], series[idx + stride]
    ok = (a >= floor) & (b >= floor)
    vals = np.full(idx.size, np.nan)
    vals[ok] = -np.log(b[ok] / a[ok]) / dt
    mean = float(vals[ok].mean()) if ok.any() else math.nan
    return SpeedSummary(mean, vals, times[idx], int((~ok).sum()), dt, t_burn)


def cost_ratio(events, T):
    """Mean over nodes of the fraction of ``[0, T]`` spent in high-cost mode."""
    if events.n == 0:
        return math.nan
    return float(np.mean([events.high_time(v, T) / T for v in range(events.n)]))


def low_ratio(events, T):
    return float(np.mean([(T - events.high_time(v, T)) / T for v in range(events.n)]))


@dataclass
class GapStats:
    low_to_high: np.ndarray  # tau_k -> t_{k+1}, triggered low events only
    high_to_low: np.ndarray  # t_k -> tau_k

    @property
    def min_low_to_high(self):
        return float(self.low_to_high.min()) if self.low_to_high.size else math.nan

    @property
    def min_high_to_low(self):
        return float(self.high_to_low.min()) if self.high_to_low.size else math.nan

    def histogram(self, kind="low_to_high", bins=20):
        return np.histogram(getattr(self, kind), bins=bins)


def gap_stats(events):
    """Dwell times between consecutive events, pooled over nodes.

    A low dwell that starts at a node's initial ``tau_0 = 0`` is not counted:
    the initial mode is set by the starting state, not by crossing the lower
    criterion, so the dwell bound does not apply to it.
    """
    lh, hl = [], []
    for v in range(events.n):
        times, kinds = events.times[v], events.kinds[v]
        for k in range(len(times) - 1):
            gap = times[k + 1] - times[k]
            if kinds[k] is Mode.HIGH:
                hl.append(gap)
            elif k > 0:
                lh.append(gap)
    return GapStats(np.array(lh), np.array(hl))


def low_gap_violations(events, bound):
    return int(np.count_nonzero(gap_stats(events).low_to_high < bound))


@dataclass
class RunReport:
    iota: float
    S_mean: float
    effectiveness: float  # |S_mean - iota| / iota
    cost_ratio: float
    min_low_to_high_gap: float
    min_high_to_low_gap: float
    low_gap_bound: float
    event_counts: list
    windows: int
    floored_windows: int
    dt: float
    t_burn: float
    clamp_count: int = 0
    max_envelope_excess: float = math.nan
    estimator_mode: str | None = None
    partial_estimate_steps: int = 0

    def to_dict(self):
        return {k: _jsonable(v) for k, v in asdict(self).items()}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    CSV_FIELDS = (
        "iota", "S_mean", "effectiveness", "cost_ratio", "min_low_to_high_gap",
        "min_high_to_low_gap", "low_gap_bound", "total_events", "max_events_per_node",
        "floored_windows", "clamp_count", "estimator_mode",
    )

    def csv_row(self):
        d = self.to_dict()
        d["total_events"] = int(sum(self.event_counts))
        d["max_events_per_node"] = int(max(self.event_counts)) if self.event_counts else 0
        return ",".join("" if d[k] is None else str(d[k]) for k in self.CSV_FIELDS)

    @classmethod
    def csv_header(cls):
        return ",".join(cls.CSV_FIELDS)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, (np.floating, np.integer)):
        return _jsonable(v.item())
    return v


def build_report(times, norm_l1, events, config, dt=1.0, t_burn=5.0, **extra):
    """Assemble a :class:`RunReport` from a grid series of ``||i||_1`` and an event log."""
    speed = mean_speed_index(times, norm_l1, dt=dt, t_burn=t_burn)
    gaps = gap_stats(events)
    return RunReport(
        iota=config.iota,
        S_mean=speed.mean,
        effectiveness=abs(speed.mean - config.iota) / config.iota,
        cost_ratio=cost_ratio(events, config.T),
        min_low_to_high_gap=gaps.min_low_to_high,
        min_high_to_low_gap=gaps.min_high_to_low,
        low_gap_bound=config.low_gap_bound,
        event_counts=events.counts().tolist(),
        windows=int(speed.values.size - speed.floored),
        floored_windows=speed.floored,
        dt=dt,
        t_burn=t_burn,
        **extra,
    )


def report_for_run(run, dt=1.0, t_burn=5.0):
    cfg = run.config
    grid = np.arange(run.norm_l1.size) * cfg.h
    extra = dict(
        clamp_count=run.clamp_count,
        max_envelope_excess=float(np.max(run.envelope_excess)) if run.envelope_excess.size else math.nan,
    )
    estimator = run.extras.get("estimator")
    if estimator is not None:
        extra["estimator_mode"] = estimator.mode
        extra["partial_estimate_steps"] = run.extras.get("partial_steps", 0)
    return build_report(grid, run.norm_l1, run.events, cfg, dt, t_burn, **extra)
