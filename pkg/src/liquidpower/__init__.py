"""Voting-power analysis for delegative (liquid) democracy platforms."""

from .dataset import Area, Ballot, Dataset, Initiative, Issue, load_dataset, save_dataset
from .delegation import (
    DelegationEdge,
    DelegationSnapshot,
    EffectiveWeights,
    active_edge,
    delegation_graph_at,
    resolve_weights,
)
from .empirical import (
    BallotSet,
    EmpiricalCurves,
    PowerCurve,
    ResolvedVoting,
    Vote,
    agreement_rate,
    approval_rate,
    exercised_power,
    outcome,
    potential_power,
    power_correlation,
    power_curves,
    resolve_dataset,
    reversal_analysis,
    user_approval_rates,
)
from .errors import (
    DataFormatError,
    DegenerateInputError,
    InvalidInputError,
    ResourceLimitError,
    SeparationError,
)
from .evaluation import (
    EvaluationReport,
    ModelSpec,
    benchmark,
    indices_table,
    log_likelihood,
    perplexity,
    squared_error,
)
from .fitting import (
    BetaFit,
    LogisticFit,
    PowerLawFit,
    fit_beta_mle,
    fit_logistic,
    fit_power_law,
    gini,
)
from .game import (
    DEFAULT_ENUMERATION_CAP,
    VotingGame,
    is_swing,
    is_winning,
    swing_counts_by_size,
)
from .indices import (
    ApprovalModel,
    IndexResult,
    banzhaf_exact,
    beta2_index_exact,
    beta_index_exact,
    classical_index_monte_carlo,
    index_monte_carlo,
    regression_index_exact,
    shapley_exact,
)
from .netstats import (
    DelegationGraph,
    clustering_coefficient,
    largest_component,
    reciprocity,
    stats_time_series,
)
from .synth import SynthConfig, generate_synthetic

__version__ = "0.1.0"
