"""Shapley attribution of model risk changes to real and virtual drift."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConfigError,
    DriftShapError,
    EmptyDataError,
    EnumerationOverflowError,
    InvalidConceptError,
    NonNumericError,
    OutOfRangeError,
    PerturbCategoricalError,
    PlanMismatchError,
    SchemaMismatchError,
    TooManyPlayersError,
    UnknownCategoryError,
)
from .hypotheses import (  # noqa: F401
    BooleanRule,
    DecisionTree,
    Hypothesis,
    LossFunction,
    PredictionMap,
    train_tree,
)
from .risk import RiskConfig, RiskValue, evaluate_risk, evaluate_risk_sampled  # noqa: F401
from .schema import (  # noqa: F401
    BinnedDataset,
    BinSpec,
    FeatureSchema,
    FeatureSpec,
    LabelSpec,
    RawTable,
    encode,
    fit_bins,
    infer_schema,
)
from .shapley import (  # noqa: F401
    AttributionReport,
    DistributionValueFunction,
    shapley_exact,
    shapley_monte_carlo,
    shapley_two_player,
)
from .tables import (  # noqa: F401
    ConditionalTable,
    FactorizationPlan,
    InputDistribution,
    Player,
    PopulationDistributions,
    assemble_hybrid,
    estimate_conditional,
    estimate_input,
)
