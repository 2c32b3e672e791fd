"""Code-expanded random access: contention analysis, simulation, planning.

Contenders in a virtual frame of L random access sub-frames transmit one
symbol (a preamble, or idle) per sub-frame, so a codeword identifies each of
them.  The package computes the contention efficiency of such schemes in
closed form and through a Markov chain over base-station observations
(phantom codewords included), validates both against Monte Carlo and exact
enumeration, and plans which codebook to use at which user load.
"""

from .codebook import (
    ENUMERATION_CAP,
    CodebookSpec,
    Codeword,
    Mode,
    codebook_size,
    enumerate_codewords,
    min_expanded_preambles,
    restrictions_for_cardinality,
    sample_codeword,
    sample_codewords,
    strictly_outperforms_reference,
)
from .contention import (
    LoadPoint,
    contention_pmf,
    expected_collisions,
    expected_singles,
    reference_efficiency,
)
from .errors import (
    BudgetExceedsTotal,
    CodexpandError,
    DomainError,
    EnumerationTooLarge,
    InputParseError,
    NotUniform,
    SizeExceedsCap,
    StateSpaceTooLarge,
)
from .markov import (
    STATE_CAP,
    Configuration,
    StateSpace,
    TransitionModel,
    build_lumped_model,
    build_state_space,
    build_transition_model,
    configuration_cardinality,
    expanded_efficiency,
    perceived_count,
    transition_count,
)
from .planner import (
    CandidateSet,
    ScheduleSegment,
    ThresholdSchedule,
    cardinalities_of_interest,
    crossover_point,
    default_candidates,
    efficiency_curve,
    partition_preambles,
    spec_for_cardinality,
    state_cardinality_values,
    supported_load,
    threshold_schedule,
)
from .simulate import (
    BRUTE_FORCE_CAP,
    AggregateStats,
    Estimate,
    ExpectedOutcome,
    ScenarioConfig,
    TrialOutcome,
    brute_force_expected,
    observe,
    run_batch,
    run_trial,
    trial_rng,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateStats",
    "BRUTE_FORCE_CAP",
    "BudgetExceedsTotal",
    "CandidateSet",
    "CodebookSpec",
    "Codeword",
    "CodexpandError",
    "Configuration",
    "DomainError",
    "ENUMERATION_CAP",
    "EnumerationTooLarge",
    "Estimate",
    "ExpectedOutcome",
    "InputParseError",
    "LoadPoint",
    "Mode",
    "NotUniform",
    "STATE_CAP",
    "ScenarioConfig",
    "ScheduleSegment",
    "SizeExceedsCap",
    "StateSpace",
    "StateSpaceTooLarge",
    "ThresholdSchedule",
    "TransitionModel",
    "TrialOutcome",
    "brute_force_expected",
    "build_lumped_model",
    "build_state_space",
    "build_transition_model",
    "cardinalities_of_interest",
    "codebook_size",
    "configuration_cardinality",
    "contention_pmf",
    "crossover_point",
    "default_candidates",
    "efficiency_curve",
    "enumerate_codewords",
    "expanded_efficiency",
    "expected_collisions",
    "expected_singles",
    "min_expanded_preambles",
    "observe",
    "partition_preambles",
    "perceived_count",
    "reference_efficiency",
    "restrictions_for_cardinality",
    "run_batch",
    "run_trial",
    "sample_codeword",
    "sample_codewords",
    "spec_for_cardinality",
    "state_cardinality_values",
    "strictly_outperforms_reference",
    "supported_load",
    "threshold_schedule",
    "transition_count",
    "trial_rng",
]
