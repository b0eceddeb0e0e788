"""From 0/1 observations back to compromise probabilities.

Observations are fabricated from the probability state with one uniform
draw per node and grid step (``chi = 1`` iff ``i - u >= 0``).  Estimates are
occupancy fractions: over the whole history, over a fixed window of the
most recent samples, or over a window that grows as ``max(W, t / C0)``.
Windows are counted in grid samples, so an estimate is an exact ratio of
integers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .controller import closed_loop, validate_control
from .errors import ConfigError

MODES = ("full_history", "fixed_window", "adaptive_window", "oracle")


def sample_state(i_v, draw):
    """Heaviside observation with ``H(0) = 1``."""
    return (np.asarray(i_v) - np.asarray(draw) >= 0).astype(np.uint8)


def window_samples(W, h):
    """Number of grid samples covering a window of length ``W`` (rounded up)."""
    return max(1, math.ceil(W / h - 1e-9))


@dataclass(frozen=True)
class EstimatorConfig:
    W: float = 30.0
    C0: float = 3.0
    mode: str = "adaptive_window"

    def validate(self, h):
        if self.mode not in MODES:
            raise ConfigError(f"unknown estimator mode {self.mode!r}; expected one of {MODES}")
        if not self.W > 0:
            raise ConfigError(f"window W must be positive, got {self.W}")
        if not self.C0 > 0:
            raise ConfigError(f"C0 must be positive, got {self.C0}")
        rounded = window_samples(self.W, h) * h
        if abs(rounded - self.W) > 1e-9 * max(1.0, self.W):
            warnings.warn(f"window W={self.W} is not a multiple of h={h}; using {rounded}", UserWarning)
        return self


def adaptive_window(t, W, C0, h=None):
    """``max(W, t / C0)``, rounded up to the grid when ``h`` is given."""
    w = max(W, t / C0)
    if h is not None:
        w = window_samples(w, h) * h
    return w


@dataclass
class SampleTrace:
    """Bits ``chi_v(t_j)`` for grid steps ``j = 0..steps`` (rows) and nodes (columns)."""

    bits: np.ndarray
    h: float
    seed: int | None = None

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 2:
            raise ValueError("bits must be a (steps, nodes) array")
        if np.any(self.bits > 1):
            raise ValueError("bits must be 0 or 1")

    @property
    def steps(self):
        return self.bits.shape[0]

    def step_of(self, t):
        j = int(round(t / self.h))
        if abs(j * self.h - t) > 1e-9 * max(1.0, t):
            raise ValueError(f"t={t} is not on the grid of step {self.h}")
        if not 0 <= j < self.steps:
            raise ValueError(f"t={t} is outside the trace")
        return j

    def run_lengths(self, v):
        """Run-length encoding of one node's bits as ``(first_bit, lengths)``."""
        col = self.bits[:, v]
        if col.size == 0:
            return 0, []
        change = np.flatnonzero(np.diff(col)) + 1
        bounds = np.concatenate(([0], change, [col.size]))
        return int(col[0]), np.diff(bounds).tolist()

    @classmethod
    def from_run_lengths(cls, columns, h, seed=None):
        cols = []
        for first, lengths in columns:
            bit, parts = first, []
            for length in lengths:
                parts.append(np.full(length, bit, dtype=np.uint8))
                bit = 1 - bit
            cols.append(np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint8))
        return cls(np.column_stack(cols), h, seed)


def full_history_estimate(trace, v, t):
    """Time-averaged occupancies ``(s_hat, i_hat)`` over ``(0, t]``."""
    if t <= 0:
        raise ValueError("full-history estimate needs t > 0")
    j = trace.step_of(t)
    ones = int(trace.bits[1:j + 1, v].sum())
    i_hat = ones / j
    return 1.0 - i_hat, i_hat


@dataclass
class WindowEstimate:
    value: float
    samples: int
    partial: bool


def window_estimate(trace, v, t, W):
    """Fraction of 1-bits among the ``W / h`` most recent samples up to ``t``.

    Before a full window of history exists every sample so far is used and
    the result is flagged partial.
    """
    j = trace.step_of(t)
    w = window_samples(W, trace.h)
    lo = max(0, j + 1 - w)
    count = int(trace.bits[lo:j + 1, v].sum())
    return WindowEstimate(count / (j + 1 - lo), j + 1 - lo, j + 1 < w)


class StreamingEstimator:
    """Incremental estimator fed one row of bits per grid step.

    Keeps cumulative 1-counts per node so any window (fixed or growing) is a
    difference of two integer rows.
    """

    def __init__(self, n, steps, h, config):
        self.h = h
        self.config = config
        self.cum = np.zeros((steps + 2, n), dtype=np.int64)
        self.j = -1
        self.partial_steps = 0

    def window_length(self, t):
        cfg = self.config
        if cfg.mode == "adaptive_window":
            return adaptive_window(t, cfg.W, cfg.C0)
        return cfg.W

    def push(self, bits):
        self.j += 1
        self.cum[self.j + 1] = self.cum[self.j] + bits

    def estimate(self):
        j, cfg = self.j, self.config
        if cfg.mode == "full_history":
            # (0, t] excludes the t = 0 sample; at t = 0 fall back to it
            lo = 1 if j > 0 else 0
        else:
            w = window_samples(self.window_length(j * self.h), self.h)
            lo = max(0, j + 1 - w)
            if j + 1 < w:
                self.partial_steps += 1
        counts = self.cum[j + 1] - self.cum[lo]
        return counts / (j + 1 - lo)

    def counts(self, lo, hi):
        """1-counts over samples ``lo..hi-1``."""
        return self.cum[hi] - self.cum[lo]


class UniformStream:
    """Seeded uniforms indexed by (step, node).

    Draw ``(j, v)`` is element ``j * n + v`` of one Philox stream, filled in
    blocks, so the values do not depend on how nodes are scheduled.
    """

    def __init__(self, n, seed, block=1024):
        self.n = n
        self.block = block
        self._gen = np.random.Generator(np.random.Philox(key=seed))
        self._buf = np.empty((0, n))
        self._pos = 0

    def next_row(self):
        if self._pos >= self._buf.shape[0]:
            self._buf = self._gen.random((self.block, self.n))
            self._pos = 0
        row = self._buf[self._pos]
        self._pos += 1
        return row


def run_control_sampled(
    graph, config, estimator, i0, scaling=None, seed=0, record_stride=1, workers=1
):
    """Closed loop whose trigger sees only windowed estimates of 0/1 samples.

    The true state still evolves by the push-only dynamics and is what the
    returned trajectory records.  ``estimator.mode == "oracle"`` feeds the
    true state to the trigger (samples are still drawn), which reduces to
    :func:`cyberswitch.controller.run_control`.
    """
    estimator.validate(config.h)
    scaling = validate_control(graph, config, scaling)
    n, steps = graph.n, config.steps
    stream = UniformStream(n, seed)
    est = StreamingEstimator(n, steps, config.h, estimator)
    bits = np.zeros((steps + 1, n), dtype=np.uint8)
    est_t, est_x = [], []

    def observe(j, t, i):
        row = sample_state(i, stream.next_row())
        bits[j] = row
        est.push(row)
        i_hat = i if estimator.mode == "oracle" else est.estimate()
        if j % record_stride == 0 or j == steps:
            est_t.append(t)
            est_x.append(np.array(i_hat, dtype=float))
        return i_hat

    run = closed_loop(graph, config, i0, scaling, observe, record_stride, workers)
    run.extras.update(
        trace=SampleTrace(bits, config.h, seed),
        estimate_times=np.array(est_t),
        estimates=np.array(est_x),
        estimator=estimator,
        partial_steps=est.partial_steps,
    )
    return run
