"""Exception types shared across the package.

The CLI maps these onto exit codes, so estimation code should raise the
most specific type that applies rather than bare ValueError.
"""


class CausalCourseError(Exception):
    """Base class for all package errors."""


class ConfigError(CausalCourseError):
    """Malformed configuration, schema, or request structure."""


class DataError(CausalCourseError):
    """Input data violates a structural requirement (types, ranges, grouping)."""


class SpecificationError(CausalCourseError):
    """A model or estimand specification is inconsistent with the data or itself."""


class RankDeficiencyError(SpecificationError):
    """Design matrix is rank deficient; carries the offending column labels."""

    def __init__(self, columns):
        self.columns = tuple(columns)
        super().__init__(
            "design matrix is rank deficient; linearly dependent columns: "
            + ", ".join(self.columns)
        )


class SeparationError(SpecificationError):
    """Logistic fit diverged, indicating perfect or quasi-perfect separation."""


class ConvergenceError(CausalCourseError):
    """Iterative fit failed to reach tolerance within the iteration budget."""


class EstimationError(CausalCourseError):
    """Estimation failed for a reason not covered by a more specific type."""


class BootstrapAbort(CausalCourseError):
    """Too many bootstrap replicates failed for the interval to be trusted."""

    def __init__(self, n_failed, n_total):
        self.n_failed = int(n_failed)
        self.n_total = int(n_total)
        super().__init__(
            f"bootstrap aborted: {self.n_failed} of {self.n_total} replicates failed "
            "(more than 10%)"
        )
