"""Finite-difference laboratory for blow-up of a damped semilinear wave equation on Z^d."""
__version__ = "0.1.0"

from .bounds import (
    MonitorReport,
    SequenceWindow,
    check_hypotheses,
    growth_monitors,
    identity_monitors,
    convex_linear_bound,
    convex_nlogn_bound,
    lifespan_fit,
)
from .config import ConfigError, RunConfig, load_config, parse_config, render_config
from .lattice import L1Ball, LatticeField, count_l1_ball, l1_ball_bound, l1_norm, neighbor_sum, support_radius
from .observables import ProofConstants, Trace, compute_constants, energy, lattice_sum
from .scheme import (
    BlowUpVerdict,
    SchemeParams,
    ShapeSpec,
    SimState,
    Status,
    check_blowup,
    init_state,
    step_power,
    step_tan,
)
from .simulation import RunReport, run

__all__ = [
    "BlowUpVerdict", "ConfigError", "L1Ball", "LatticeField", "MonitorReport", "ProofConstants", "RunConfig",
    "RunReport", "SchemeParams", "SequenceWindow", "ShapeSpec", "SimState", "Status", "Trace",
    "check_blowup", "check_hypotheses", "compute_constants", "convex_linear_bound", "convex_nlogn_bound",
    "count_l1_ball", "energy", "growth_monitors", "identity_monitors", "init_state", "l1_ball_bound", "l1_norm",
    "lattice_sum", "lifespan_fit", "load_config", "neighbor_sum", "parse_config", "render_config", "run",
    "step_power", "step_tan", "support_radius",
]
