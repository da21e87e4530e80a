"""Sharp welfare bounds and policy choice from a status-quo/proposal vote."""

from .bounds import WelfareBound, bound_width, midpoint_welfare, sharp_bound, sharp_bound_constant_a
from .decisions import (
    DecisionEntry,
    DecisionReport,
    Policy,
    Prior,
    PriorSpec,
    RegretPair,
    bayes_decide,
    decide_all,
    majority_decide,
    max_regret,
    maximin_decide,
    midpoint_bayes_decide,
    minimax_regret_decide,
    make_prior,
    supermajority_decide,
)
from .errors import (
    EmptyPopulation,
    InconsistentSummary,
    InfeasibleInput,
    InfeasibleRecord,
    InputFormatError,
    InvalidFamilyParameter,
    InvariantViolation,
    PriorOutsideBound,
    ThresholdOutOfRange,
    TieInStrictMode,
    UtilityOutOfRange,
    ValidationError,
    VoteWelfareError,
)
from .lab import (
    ContainmentSummary,
    DisagreementReport,
    FeasibleExtremes,
    feasible_extremes,
    monte_carlo_disagreement,
    random_feasible_population,
    realized_regret,
    verify_bound_containment,
)
from .model import (
    ConcordanceReport,
    FamilySpec,
    ObservedDataset,
    ObservedRecord,
    Population,
    SummaryStatistics,
    UtilityProfile,
    check_concordance,
    generate,
    make_population,
    observe,
    summarize,
    true_welfare,
    weighted_median,
)

__version__ = "0.1.0"
