"""Preventive/reactive defense dynamics on an attack-defense graph.

For every node ``v``::

    d i_v / dt = -beta_v i_v + theta_v(i) (1 - i_v)
    theta_v(i) = 1 - (1 - alpha_v) * prod_{u in N_v} (1 - gamma_uv i_u)

With ``alpha = 0`` this is the push-only model the controller acts on.
Explicit Euler on the control grid is the working integrator; classical RK4
exists to check it.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

# Clamps within this distance of [0, 1] are float noise and not counted.
CLAMP_TOL = 1e-12


@dataclass
class StateVector:
    i: np.ndarray
    t: float = 0.0
    clamped: int = 0  # material clamps performed while producing this state

    def __post_init__(self):
        self.i = np.asarray(self.i, dtype=float)
        if np.any(self.i < -CLAMP_TOL) or np.any(self.i > 1 + CLAMP_TOL):
            raise ValueError("compromise probabilities must lie in [0, 1]")

    @property
    def s(self):
        return 1.0 - self.i


@dataclass
class ModelParams:
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        if np.any(self.alpha < 0) or np.any(self.alpha > 1):
            raise ValueError("alpha must lie in [0, 1]")
        if np.any(self.beta <= 0) or np.any(self.beta > 1):
            raise ValueError("beta must lie in (0, 1]")

    @classmethod
    def uniform(cls, n, beta, alpha=0.0):
        return cls(alpha=np.full(n, float(alpha)), beta=np.full(n, float(beta)))

    def precontrolled(self):
        """Copy with pull attacks removed (``alpha = 0``)."""
        return ModelParams(alpha=np.zeros_like(self.alpha), beta=self.beta.copy())


class VectorField:
    """Evaluates the right-hand side, optionally split over node chunks.

    Each chunk reads the shared state and writes its own slice of the output,
    and every node's product is formed over the same in-edge slice in the
    same order, so results are bitwise identical for any worker count.
    """

    def __init__(self, graph, workers=1):
        self.graph = graph
        self.workers = max(1, int(workers))
        self._pool = None
        bounds = np.linspace(0, graph.n, self.workers + 1).round().astype(int)
        self.chunks = [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        if len(self.chunks) > 1:
            self._pool = ThreadPoolExecutor(max_workers=len(self.chunks))

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _products(self, i, lo, hi):
        """``prod_{u in N_v} (1 - gamma_uv i_u)`` for ``v`` in ``[lo, hi)``."""
        g = self.graph
        ptr = g.indptr
        e0, e1 = ptr[lo], ptr[hi]
        prod = np.ones(hi - lo)
        if e1 == e0:
            return prod
        factors = 1.0 - g.gamma[e0:e1] * i[g.src[e0:e1]]
        starts = ptr[lo:hi] - e0
        nonempty = ptr[lo + 1:hi + 1] > ptr[lo:hi]
        prod[nonempty] = np.multiply.reduceat(factors, starts[nonempty])
        return prod

    def _rate_chunk(self, i, alpha, beta, lo, hi, out):
        sl = slice(lo, hi)
        theta = 1.0 - (1.0 - alpha[sl]) * self._products(i, lo, hi)
        out[sl] = -beta[sl] * i[sl] + theta * (1.0 - i[sl])

    def theta(self, i, alpha):
        return 1.0 - (1.0 - alpha) * self._products(i, 0, self.graph.n)

    def rate(self, i, alpha, beta):
        out = np.empty(self.graph.n)
        if self._pool is None:
            self._rate_chunk(i, alpha, beta, 0, self.graph.n, out)
        else:
            futures = [
                self._pool.submit(self._rate_chunk, i, alpha, beta, lo, hi, out)
                for lo, hi in self.chunks
            ]
            for f in futures:
                f.result()
        return out


def _clamp(x):
    bad = int(np.count_nonzero((x < -CLAMP_TOL) | (x > 1 + CLAMP_TOL)))
    return np.clip(x, 0.0, 1.0), bad


def euler_update(field, i, alpha, beta, h):
    """One clamped Euler step on raw arrays; returns ``(i_next, n_clamped)``."""
    return _clamp(i + h * field.rate(i, alpha, beta))


def rk4_update(field, i, alpha, beta, h):
    k1 = field.rate(i, alpha, beta)
    k2 = field.rate(i + 0.5 * h * k1, alpha, beta)
    k3 = field.rate(i + 0.5 * h * k2, alpha, beta)
    k4 = field.rate(i + h * k3, alpha, beta)
    return _clamp(i + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))


def theta_penetration(v, state, params, graph):
    """Probability that secure node ``v`` is penetrated at the current state."""
    i = state.i if isinstance(state, StateVector) else np.asarray(state, dtype=float)
    lo, hi = graph.indptr[v], graph.indptr[v + 1]
    prod = np.prod(1.0 - graph.gamma[lo:hi] * i[graph.src[lo:hi]])
    return float(1.0 - (1.0 - params.alpha[v]) * prod)


def derivative(state, params, graph, workers=1):
    i = state.i if isinstance(state, StateVector) else np.asarray(state, dtype=float)
    with VectorField(graph, workers) as field:
        return field.rate(i, params.alpha, params.beta)


def step_euler(state, params, graph, h):
    if h < 0:
        raise ValueError("step length must be nonnegative")
    with VectorField(graph) as field:
        nxt, bad = euler_update(field, state.i, params.alpha, params.beta, h)
    return StateVector(nxt, state.t + h, bad)


def step_rk4(state, params, graph, h):
    if h < 0:
        raise ValueError("step length must be nonnegative")
    with VectorField(graph) as field:
        nxt, bad = rk4_update(field, state.i, params.alpha, params.beta, h)
    return StateVector(nxt, state.t + h, bad)


@dataclass
class Trajectory:
    times: np.ndarray  # recorded grid times
    states: np.ndarray  # shape (len(times), n)
    norm_l1: np.ndarray  # ||i||_1 at every grid point, regardless of stride
    h: float
    clamp_count: int = 0

    @property
    def final(self):
        return self.states[-1]


def num_steps(T, h):
    steps = int(round(T / h))
    if steps <= 0 or abs(steps * h - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"horizon T={T} is not a positive multiple of h={h}")
    return steps


def integrate(graph, params, i0, h, T, method="euler", record_stride=1, workers=1):
    """Free-running trajectory with fixed parameters on the grid ``0, h, ..., T``."""
    update = {"euler": euler_update, "rk4": rk4_update}[method]
    steps = num_steps(T, h)
    i = StateVector(i0).i.copy()
    norms = np.empty(steps + 1)
    rec_t, rec_x = [], []
    clamps = 0
    with VectorField(graph, workers) as field:
        for j in range(steps + 1):
            norms[j] = i.sum()
            if j % record_stride == 0 or j == steps:
                rec_t.append(j * h)
                rec_x.append(i.copy())
            if j == steps:
                break
            i, bad = update(field, i, params.alpha, params.beta, h)
            clamps += bad
    if clamps:
        warnings.warn(f"{clamps} state components were clamped back into [0, 1]", RuntimeWarning)
    return Trajectory(np.array(rec_t), np.array(rec_x), norms, h, clamps)
