"""Exception types shared across the package.

Every anticipated failure raises a subclass of :class:`PovkitError` so
callers (notably the command line driver) can separate usage problems
from genuine bugs.
"""


class PovkitError(Exception):
    """Base class for all package-specific errors."""


class DataError(PovkitError):
    """Malformed, empty, or inconsistent input data."""


class DuplicateKeyError(DataError):
    """A (entity, time) key appears more than once; message names the key."""


class UnknownColumnError(DataError):
    """A referenced column is absent from the data."""


class MissingValueError(DataError):
    """Missing values encountered under a strict missing-data policy."""


class SchemeError(PovkitError):
    """An indicator scheme or capital grouping fails validation."""


class DegenerateDataError(PovkitError):
    """Data carries no usable variation (e.g. every indicator constant)."""


class UndefinedResultError(PovkitError):
    """A requested quantity is undefined for this input (e.g. shares of zero)."""


class InfeasibleParamsError(PovkitError):
    """Model parameters admit no interior optimum."""


class EstimationError(PovkitError):
    """Base class for estimator failures."""


class RankDeficiencyError(EstimationError):
    """Design matrix is rank deficient."""


class SeparationError(EstimationError):
    """Perfect or quasi-perfect separation in a binary-response fit."""


class NonConvergenceError(EstimationError):
    """Iteration limit reached before the convergence criterion."""


class SingleClusterError(EstimationError):
    """Cluster-robust covariance requested with fewer than two clusters."""


class ConfigError(PovkitError):
    """Configuration document is malformed or references unknown names."""
