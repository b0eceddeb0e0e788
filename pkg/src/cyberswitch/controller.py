"""Event-based switching of the reactive-defense strength.

Every node runs the same decentralized rule on its scaled state
``m_v = i_v / p_v``.  In high-cost mode (``beta_plus``) it drops to low cost
as soon as ``m_v <= L exp(-iota t)``; in low-cost mode (``beta_minus``) it
returns to high cost as soon as ``m_v >= exp(-iota t)``.  The scaling vector
``p`` comes from the M-matrix ``(beta_plus - iota) I - K^T``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dynamics import VectorField, euler_update, num_steps
from .errors import ConfigError, InfeasibleError
from .graph import spectral_radius, precontrol_check


class Mode(str, enum.Enum):
    HIGH = "high"
    LOW = "low"


class Decision(enum.Enum):
    STAY = "stay"
    SWITCH_TO_HIGH = "switch_to_high"
    SWITCH_TO_LOW = "switch_to_low"


@dataclass(frozen=True)
class SwitchingConfig:
    beta_plus: float = 0.8
    beta_minus: float = 0.1
    iota: float = 0.5
    L: float = 0.5
    h: float = 0.025
    T: float = 100.0

    def validate(self):
        if not (0 < self.beta_minus < self.beta_plus <= 1):
            raise ConfigError(
                f"need 0 < beta_minus < beta_plus <= 1, got beta_minus={self.beta_minus}, "
                f"beta_plus={self.beta_plus}"
            )
        if not (0 < self.L < 1):
            # L >= 1 would let both triggers hold at one grid point
            raise ConfigError(f"L must lie in (0, 1), got {self.L}")
        if not self.iota > 0:
            raise ConfigError(f"iota must be positive, got {self.iota}")
        if not self.h > 0:
            raise ConfigError(f"h must be positive, got {self.h}")
        try:
            num_steps(self.T, self.h)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    @property
    def steps(self):
        return num_steps(self.T, self.h)

    @property
    def low_gap_bound(self):
        """Minimum low-to-high dwell time ``-ln(L) / iota`` in continuous time."""
        return -math.log(self.L) / self.iota

    def max_events_per_node(self):
        return 1 + self.T / (self.low_gap_bound - self.h) + 1


def criterion_up(t, iota):
    return np.exp(-iota * np.asarray(t, dtype=float))


def criterion_low(t, iota, L):
    return L * np.exp(-iota * np.asarray(t, dtype=float))


@dataclass
class MMatrixReport:
    feasible: bool
    margin: float  # (beta_plus - iota) - rho(K^T)
    rho: float
    spectral: object = field(default=None, repr=False)

    def __bool__(self):
        return self.feasible


def check_m_matrix(graph, beta_plus, iota):
    """Is ``(beta_plus - iota) I - K^T`` a nonsingular M-matrix?

    Holds iff the spectral radius of ``K^T`` is below ``beta_plus - iota``.
    When the power iteration has not converged the Collatz-Wielandt upper
    bound is used instead, which can only make the answer more conservative.
    """
    diag = beta_plus - iota
    if diag <= 0:
        return MMatrixReport(False, float(diag), math.nan)
    rep = spectral_radius(graph.gamma_matrix())
    rho = rep.lambda_max if rep.converged else rep.upper_bound
    margin = diag - rho
    return MMatrixReport(bool(margin > 0), float(margin), float(rho), rep)


@dataclass
class ScalingVector:
    p: np.ndarray
    raw_min: float  # min of the unnormalized solution
    iterations: int
    residual: float

    def lemma_slack(self, graph, beta_plus, iota):
        """``sum_w gamma_wv p_w + (iota - beta_plus) p_v`` per node; all negative when valid."""
        return graph.gamma_matrix() @ self.p + (iota - beta_plus) * self.p


def compute_scaling(graph, beta_plus, iota, tol=1e-10, max_iter=100_000):
    """Positive scaling with ``sum_w gamma_wv p_w < (beta_plus - iota) p_v`` for all v.

    Solves ``((beta_plus - iota) I - K^T) p = 1`` by Jacobi iteration, which
    is the Neumann series of the inverse M-matrix and stays positive, then
    rescales so ``min(p) = 1``.  The slack of the normalized vector is
    ``-1 / raw_min`` on every node.
    """
    check = check_m_matrix(graph, beta_plus, iota)
    if not check:
        raise InfeasibleError(
            f"(beta_plus - iota) I - K^T is not an M-matrix: margin {check.margin:.6g}; "
            "increase beta_plus or decrease iota",
            check="m_matrix",
            margin=check.margin,
        )
    d = beta_plus - iota
    K = graph.gamma_matrix()
    ones = np.ones(graph.n)
    p = ones / d
    residual = np.inf
    for it in range(1, max_iter + 1):
        nxt = (ones + K @ p) / d
        p = nxt
        residual = float(np.abs(d * p - K @ p - ones).max())
        if residual <= tol:
            break
    else:
        raise InfeasibleError(
            f"scaling iteration did not reach residual {tol:g} (got {residual:.3g}); "
            "spectral margin too thin, increase beta_plus or decrease iota",
            check="scaling",
            margin=check.margin,
        )
    raw_min = float(p.min())
    scaled = ScalingVector(p / raw_min, raw_min, it, residual)
    slack = scaled.lemma_slack(graph, beta_plus, iota)
    if not np.all(slack < 0):
        raise InfeasibleError("scaling vector violates the strict inequality", check="scaling")
    return scaled


def initial_mode(m0):
    return Mode.HIGH if m0 >= 1 else Mode.LOW


def trigger(t, m, mode, iota, L):
    """Decision for one node at grid time ``t``; boundaries are inclusive."""
    mode = Mode(mode)
    if mode is Mode.HIGH:
        if m <= L * math.exp(-iota * t):
            return Decision.SWITCH_TO_LOW
    elif m >= math.exp(-iota * t):
        return Decision.SWITCH_TO_HIGH
    return Decision.STAY


class EventLog:
    """Per-node switching events.

    The first entry of every node is its initial mode at ``t = 0``
    (``t_1 = 0`` for high, ``tau_0 = 0`` for low); later entries are
    triggered switches and always alternate in kind.
    """

    def __init__(self, n):
        self.n = n
        self.times = [[] for _ in range(n)]
        self.kinds = [[] for _ in range(n)]

    def add(self, node, kind, time):
        kind = Mode(kind)
        if self.kinds[node] and self.kinds[node][-1] is kind:
            raise ValueError(f"node {node}: consecutive {kind.value} events")
        self.times[node].append(float(time))
        self.kinds[node].append(kind)

    def counts(self):
        return np.array([len(k) for k in self.kinds])

    def initial_mode(self, node):
        return self.kinds[node][0] if self.kinds[node] else Mode.LOW

    def rows(self):
        """``(node, kind, time)`` sorted by time then node."""
        out = [(v, k.value, t) for v in range(self.n) for t, k in zip(self.times[v], self.kinds[v])]
        out.sort(key=lambda r: (r[2], r[0]))
        return out

    @classmethod
    def from_rows(cls, n, rows):
        log = cls(n)
        for node, kind, time in sorted(rows, key=lambda r: (float(r[2]), int(r[0]))):
            log.add(int(node), kind, float(time))
        return log

    def high_time(self, node, T):
        """Total time spent in high-cost mode on ``[0, T]``."""
        times, kinds = self.times[node], self.kinds[node]
        if not times:
            return T if self.initial_mode(node) is Mode.HIGH else 0.0
        total = 0.0
        for k, (t, kind) in enumerate(zip(times, kinds)):
            if kind is Mode.HIGH:
                end = times[k + 1] if k + 1 < len(times) else T
                total += min(end, T) - min(t, T)
        return total

    def __eq__(self, other):
        return isinstance(other, EventLog) and self.rows() == other.rows()


@dataclass
class ControlRun:
    config: SwitchingConfig
    scaling: ScalingVector
    times: np.ndarray
    states: np.ndarray
    norm_l1: np.ndarray
    events: EventLog
    # max over grid times after the node's first low event of m_v - phi_up
    envelope_excess: np.ndarray
    clamp_count: int = 0
    extras: dict = field(default_factory=dict)


def validate_control(graph, config, scaling=None):
    """Reject configurations the controller cannot guarantee.

    Returns the scaling vector, computing it if not supplied.
    """
    config.validate()
    pre = precontrol_check(graph, config.beta_minus)
    if not pre:
        raise InfeasibleError(
            f"pre-control check failed: beta_minus/gamma_max = {pre.ratio:.6g} < "
            f"lambda_A = {pre.lambda_max:.6g}",
            check="precontrol",
            margin=pre.margin,
        )
    if scaling is None:
        scaling = compute_scaling(graph, config.beta_plus, config.iota)
    return scaling


def closed_loop(graph, config, i0, scaling, observe=None, record_stride=1, workers=1):
    """Grid realization of the switching rule on the push-only dynamics.

    At every grid time the trigger is evaluated on ``observe(j, t, i)``
    (the true state when ``observe`` is None), beta is set per node, and one
    Euler step advances the true state.
    """
    h, iota, L = config.h, config.iota, config.L
    steps = config.steps
    n = graph.n
    p = scaling.p
    i = np.asarray(i0, dtype=float).copy()
    if i.shape != (n,) or np.any(i < 0) or np.any(i > 1):
        raise ConfigError("initial state must be a vector in [0, 1]^n")
    alpha = np.zeros(n)
    log = EventLog(n)
    norms = np.empty(steps + 1)
    rec_t, rec_x = [], []
    excess = np.full(n, -np.inf)
    seen_low = np.zeros(n, dtype=bool)
    clamps = 0
    high = np.zeros(n, dtype=bool)

    with VectorField(graph, workers) as vf:
        for j in range(steps + 1):
            t = j * h
            est = i if observe is None else observe(j, t, i)
            m = est / p
            up = math.exp(-iota * t)
            if j == 0:
                high = m >= 1.0
                for v in range(n):
                    log.add(v, Mode.HIGH if high[v] else Mode.LOW, 0.0)
            else:
                to_low = high & (m <= L * up)
                to_high = ~high & (m >= up)
                for v in np.flatnonzero(to_low | to_high):
                    log.add(v, Mode.LOW if to_low[v] else Mode.HIGH, t)
                high = (high & ~to_low) | to_high
            seen_low |= ~high
            true_excess = i / p - up
            excess[seen_low] = np.maximum(excess[seen_low], true_excess[seen_low])
            norms[j] = i.sum()
            if j % record_stride == 0 or j == steps:
                rec_t.append(t)
                rec_x.append(i.copy())
            if j == steps:
                break
            beta = np.where(high, config.beta_plus, config.beta_minus)
            i, bad = euler_update(vf, i, alpha, beta, h)
            clamps += bad

    if clamps:
        warnings.warn(f"{clamps} state components were clamped back into [0, 1]", RuntimeWarning)
    return ControlRun(
        config=config,
        scaling=scaling,
        times=np.array(rec_t),
        states=np.array(rec_x),
        norm_l1=norms,
        events=log,
        envelope_excess=excess,
        clamp_count=clamps,
    )


def run_control(graph, config, i0, scaling=None, record_stride=1, workers=1):
    """Closed-loop run driven by the true probability state."""
    scaling = validate_control(graph, config, scaling)
    return closed_loop(graph, config, i0, scaling, None, record_stride, workers)

