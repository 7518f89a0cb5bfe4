"""Purification and swapping schedules on a two-link quantum repeater."""

from .experiment import ConfigError, ExperimentConfig, ExperimentReport, relative_gap, run_experiment, run_trial
from .linksim import SimParams, SimState, SlotReport, advance_slot, attempt_generation, run_simulation
from .matching import Matching, WeightedGraph, brute_force_matching, max_weight_matching, validate_matching
from .policies import (
    EntPair,
    NetworkSnapshot,
    Policy,
    ScheduleOutcome,
    Span,
    SuccessModel,
    build_purify_graph,
    build_swap_graph,
    run_policy,
)
from .quantum import (
    DEGENERATE,
    DecayParams,
    DegenerateInputError,
    UtilityKind,
    aggregate_utility,
    decay_fidelity,
    distillation_rate,
    g_value,
    purify_fidelity,
    purify_success_prob,
    swap_fidelity,
)

__version__ = "0.1.0"
