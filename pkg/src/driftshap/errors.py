"""Exception types shared across the package."""


class DriftShapError(Exception):
    """Base class for all driftshap errors."""


class ConfigError(DriftShapError):
    """Invalid or unparsable run configuration."""


class EmptyDataError(DriftShapError):
    """A population table contained no rows (or no weight)."""


class NonNumericError(DriftShapError):
    """A continuous column contained a missing or unparseable value."""


class UnknownCategoryError(DriftShapError):
    """A categorical value (or label) is absent from the schema."""


class OutOfRangeError(DriftShapError):
    """A continuous value fell outside the fitted bin range under the reject policy."""


class SchemaMismatchError(DriftShapError):
    """Input columns or fitted state do not match the schema."""


class PlanMismatchError(DriftShapError):
    """A surrogate assignment or estimator does not fit the factorization plan."""


class TooManyPlayersError(DriftShapError):
    """Exact Shapley enumeration was requested above the player limit."""


class EnumerationOverflowError(DriftShapError):
    """The factored cell domain exceeds the budget and sampling is disabled."""


class RuleParseError(ConfigError):
    """A boolean rule expression could not be parsed."""


class InvalidConceptError(DriftShapError):
    """Unknown concept id for a generator family."""


class PerturbCategoricalError(DriftShapError):
    """A numeric perturbation was applied to a categorical feature."""


class DegenerateFeatureWarning(UserWarning):
    """A continuous feature had a single distinct baseline value; collapsed to one bin."""
