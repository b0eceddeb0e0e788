"""Event-based switching control of preventive/reactive cyber-defense dynamics."""

from .controller import (
    ControlRun,
    EventLog,
    Mode,
    ScalingVector,
    SwitchingConfig,
    check_m_matrix,
    compute_scaling,
    criterion_low,
    criterion_up,
    run_control,
    trigger,
)
from .dynamics import ModelParams, StateVector, derivative, integrate, step_euler, step_rk4, theta_penetration
from .errors import ConfigError, EdgeListError, EmptyGraphError, InfeasibleError
from .estimation import (
    EstimatorConfig,
    SampleTrace,
    adaptive_window,
    full_history_estimate,
    run_control_sampled,
    sample_state,
    window_estimate,
)
from .graph import (
    AttackDefenseGraph,
    assign_gammas,
    dump_edge_list,
    erdos_renyi,
    load_edge_list,
    precontrol_check,
    read_edge_list,
    spectral_radius,
)
from .metrics import RunReport, cost_ratio, gap_stats, mean_speed_index, speed_index

__version__ = "0.1.0"
