"""Discrete-time control barrier functions with approximate safety
overrides, plus the episodic environments used to evaluate them."""

from .barrier import (
    CONSTRAINT_TOL,
    VIOLATION_TOL,
    BarrierFn,
    InvarianceReport,
    check_forward_invariance,
    compose_max,
    compose_min,
    constraint_value,
    rollout_barrier,
    rollout_trajectory,
)
from .dynamics import (
    Box,
    CarControl,
    CarJointState,
    CarState,
    DblIntState,
    FwControl,
    FwState,
    car_beta,
    car_control_box,
    car_step,
    dblint_control_box,
    dblint_step,
    fw_control_box,
    fw_drag,
    fw_step,
)
from .envs import (
    CarEnv,
    CarEnvConfig,
    FilteredEnv,
    FwEnv,
    FwEnvConfig,
    StepResult,
    wrap_with_filter,
)
from .errors import (
    ConfigError,
    DomainError,
    DtcbfError,
    HorizonError,
    ParamError,
    PreconditionError,
    ProtocolError,
    TheoremViolation,
)
from .filters import (
    FilterDecision,
    filter_line,
    filter_single,
    filter_with_candidates,
    grid_oracle,
)
from .params import (
    CarParams,
    FwParams,
    SimParams,
    default_params,
    load_params,
    write_params,
)
from .rng import RngStream

__version__ = "0.1.0"
