"""sdlsim: simulate and program switched-delay-line nonreciprocal networks.

The package covers the full loop: generate/validate switch clock
schedules, simulate the network in the time domain with non-ideal
switches, extract S-parameters at the excitation frequency, evaluate
the analytic switching-loss model, and enumerate or synthesize every
programmable circulation state.
"""

from .core import (
    ConfigError,
    LineModel,
    NetworkSpec,
    Schedule,
    SwitchModel,
    reduce_network,
    spec_from_dict,
    spec_to_dict,
    switch_resistance,
    validate_spec,
)
from .clocks import (
    ScheduleReport,
    canonical_schedule,
    clock_state,
    default_schedule,
    schedule_from_dict,
    schedule_to_dict,
    slot_index,
    validate_schedule,
)
from .states import (
    CirculationState,
    count_b_given_a,
    count_states,
    enumerate_states,
    is_admissible,
    reduced_circulation,
    state_from_dict,
    synth_schedule,
)
from .engine import (
    Excitation,
    SimConfig,
    TransientResult,
    compile_network,
    run_transient,
    solve_side,
)
from .extraction import (
    SParamGrid,
    coherent_grid,
    extract_column,
    group_delay,
    infer_circulation,
    magnitude_db,
    metrics,
    read_touchstone,
    sweep,
    write_csv,
    write_touchstone,
)
from .lossmodel import LossQuery, analytic_il, h_transmission, loss_contour, mean_transmission

__version__ = "0.1.0"

__all__ = [
    "CirculationState", "ConfigError", "Excitation", "LineModel", "LossQuery",
    "NetworkSpec", "SParamGrid", "Schedule", "ScheduleReport", "SimConfig",
    "SwitchModel", "TransientResult", "analytic_il", "canonical_schedule",
    "clock_state", "coherent_grid", "compile_network", "count_b_given_a",
    "count_states", "default_schedule", "enumerate_states", "extract_column",
    "group_delay", "h_transmission", "infer_circulation", "is_admissible",
    "loss_contour", "magnitude_db", "mean_transmission", "metrics",
    "read_touchstone", "reduce_network", "reduced_circulation", "run_transient",
    "schedule_from_dict", "schedule_to_dict", "slot_index", "solve_side",
    "spec_from_dict", "spec_to_dict", "state_from_dict", "sweep",
    "switch_resistance", "synth_schedule", "validate_schedule", "validate_spec",
    "write_csv", "write_touchstone",
]
