"""caclab: blocking-probability analysis for threshold-based call
admission control over a pooled channel capacity.

The package pairs exact Markov-chain analytics (with Erlang-B and
Kaufman-Roberts oracles) with a discrete-event simulator fed either by
Poisson assumptions or by generated non-stationary traffic traces.
"""

from .analytic import (
    BlockingReport,
    RateMatrix,
    RecurrenceResult,
    SteadyStateDistribution,
    blocking_probabilities,
    build_generator,
    build_literal_1d_generator,
    erlang_b,
    kaufman_roberts,
    recurrence_blocking,
    solve,
    steady_state,
)
from .errors import (
    CaclabError,
    ConfigError,
    ConvergenceError,
    DegenerateChainError,
    ModePreconditionError,
    ScenarioError,
    SimulationError,
    StateSpaceLimitError,
)
from .model import (
    StateSpace,
    SystemConfig,
    SystemState,
    TrafficClassSpec,
    admissible,
    enumerate_states,
    free_channels,
    validate_config,
)
from .simulate import (
    SimParams,
    SimStats,
    run_replication,
    run_simulation,
    run_trace_driven,
    splitmix64_stream,
)
from .sweeps import (
    ComparisonReport,
    SweepResult,
    SweepRow,
    SweepSpec,
    compare_analytic_sim,
    default_scenario,
    run_sweep,
)
from .traffic import (
    ArrivalTrace,
    BiPareto,
    Constant,
    Exponential,
    Lognormal,
    MixtureComponent,
    MmppParams,
    RateFunction,
    RenewalProcess,
    TrafficMixtureSpec,
    Weibull,
    compose_traffic,
    sample_distribution,
    sample_mmpp,
    sample_poisson_process,
    sample_renewal,
    superpose_user_sessions,
)

__version__ = "0.1.0"

__all__ = [
    "ArrivalTrace",
    "BiPareto",
    "BlockingReport",
    "CaclabError",
    "ComparisonReport",
    "ConfigError",
    "Constant",
    "ConvergenceError",
    "DegenerateChainError",
    "Exponential",
    "Lognormal",
    "MixtureComponent",
    "MmppParams",
    "ModePreconditionError",
    "RateFunction",
    "RateMatrix",
    "RecurrenceResult",
    "RenewalProcess",
    "ScenarioError",
    "SimParams",
    "SimStats",
    "SimulationError",
    "StateSpace",
    "StateSpaceLimitError",
    "SteadyStateDistribution",
    "SweepResult",
    "SweepRow",
    "SweepSpec",
    "SystemConfig",
    "SystemState",
    "TrafficClassSpec",
    "TrafficMixtureSpec",
    "Weibull",
    "admissible",
    "blocking_probabilities",
    "build_generator",
    "build_literal_1d_generator",
    "compare_analytic_sim",
    "compose_traffic",
    "default_scenario",
    "enumerate_states",
    "erlang_b",
    "free_channels",
    "kaufman_roberts",
    "recurrence_blocking",
    "run_replication",
    "run_simulation",
    "run_sweep",
    "run_trace_driven",
    "sample_distribution",
    "sample_mmpp",
    "sample_poisson_process",
    "sample_renewal",
    "solve",
    "splitmix64_stream",
    "steady_state",
    "superpose_user_sessions",
    "validate_config",
]
