"""JSON run configuration shared by every CLI subcommand."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .controller import SwitchingConfig
from .errors import ConfigError
from .estimation import EstimatorConfig
from .graph import assign_gammas, erdos_renyi, read_edge_list

RUN_MODES = ("simulate", "control", "control_sampled")
I0_MODES = ("uniform_random", "constant", "file")


@dataclass
class RunConfig:
    mode: str = "control"
    # graph source: an edge-list file, or a seeded directed G(n, p) when null
    graph_path: str | None = None
    directed: bool = True
    n: int = 200
    mean_degree: float = 6.0
    seed: int = 0
    gamma_max: float = 0.005
    alpha: float = 0.0
    beta: float | None = None  # fixed beta for simulate; defaults to beta_plus
    beta_plus: float = 0.8
    beta_minus: float = 0.1
    iota: float = 0.5
    L: float = 0.5
    h: float = 0.025
    T: float = 100.0
    i0_mode: str = "uniform_random"
    i0_value: float = 0.5
    i0_path: str | None = None
    record_stride: int = 40
    estimator: dict = field(default_factory=lambda: {"W": 30.0, "C0": 3.0, "mode": "adaptive_window"})
    dt: float = 1.0
    t_burn: float = 5.0

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        cfg = cls(**data)
        if isinstance(cfg.estimator, dict):
            cfg.estimator = {**cls().estimator, **cfg.estimator}
        return cfg

    def to_dict(self):
        return dataclasses.asdict(self)

    @property
    def switching(self):
        return SwitchingConfig(self.beta_plus, self.beta_minus, self.iota, self.L, self.h, self.T)

    @property
    def estimator_config(self):
        try:
            return EstimatorConfig(**self.estimator)
        except TypeError as exc:
            raise ConfigError(f"bad estimator block: {exc}") from None

    def validate(self):
        if self.mode not in RUN_MODES:
            raise ConfigError(f"mode must be one of {RUN_MODES}, got {self.mode!r}")
        if self.i0_mode not in I0_MODES:
            raise ConfigError(f"i0_mode must be one of {I0_MODES}, got {self.i0_mode!r}")
        if self.i0_mode == "constant" and not (0 <= self.i0_value <= 1):
            raise ConfigError("i0_value must lie in [0, 1]")
        if self.i0_mode == "file" and not self.i0_path:
            raise ConfigError("i0_mode 'file' needs i0_path")
        if not (0 <= self.alpha <= 1):
            raise ConfigError("alpha must lie in [0, 1]")
        if self.mode != "simulate" and self.alpha != 0:
            raise ConfigError("control runs require alpha = 0 (pull attacks removed before control)")
        if not (isinstance(self.record_stride, int) and self.record_stride >= 1):
            raise ConfigError("record_stride must be a positive integer")
        if self.graph_path is None and (self.n < 2 or self.mean_degree <= 0):
            raise ConfigError("synthetic graphs need n >= 2 and mean_degree > 0")
        if self.mode == "simulate":
            beta = self.beta if self.beta is not None else self.beta_plus
            if not (0 < beta <= 1):
                raise ConfigError("beta must lie in (0, 1]")
        self.switching.validate()
        if self.mode == "control_sampled":
            self.estimator_config.validate(self.h)
        return self

    def seeds(self):
        """Independent sub-seeds for graph, gammas, initial state and sampling."""
        state = np.random.SeedSequence(self.seed).generate_state(4)
        return dict(zip(("graph", "gamma", "i0", "samples"), (int(x) for x in state)))

    def build_graph(self):
        """The configured graph with gammas drawn from the config seed."""
        seeds = self.seeds()
        if self.graph_path:
            if not Path(self.graph_path).exists():
                raise ConfigError(f"graph file not found: {self.graph_path}")
            graph = read_edge_list(self.graph_path, directed=self.directed)
        else:
            graph = erdos_renyi(self.n, self.mean_degree, seeds["graph"], directed=self.directed)
        return assign_gammas(graph, self.gamma_max, seeds["gamma"])

    def initial_state(self, n, base_dir=None):
        if self.i0_mode == "uniform_random":
            return np.random.default_rng(self.seeds()["i0"]).random(n)
        if self.i0_mode == "constant":
            return np.full(n, float(self.i0_value))
        path = Path(self.i0_path)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        values = np.loadtxt(path, delimiter=",", ndmin=1, dtype=float).ravel()
        if values.shape != (n,):
            raise ConfigError(f"i0 file has {values.size} values for {n} nodes")
        if np.any(values < 0) or np.any(values > 1):
            raise ConfigError("i0 values must lie in [0, 1]")
        return values
