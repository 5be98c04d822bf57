"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericError -> 4.
"""


class EmprojError(Exception):
    """Base class for all package errors."""


class ConfigError(EmprojError):
    """Invalid scenario, prior, or run configuration."""


class DataError(EmprojError):
    """Malformed or inconsistent input data."""


class StorageError(DataError):
    """Corrupt or inconsistent persisted ensemble/output files."""


class NumericError(EmprojError):
    """Numerical failure (overflow, no finite-posterior point, ...)."""


class SimulationError(NumericError):
    """Forward simulation produced a non-finite state."""


class NonStationaryError(NumericError):
    """VAR coefficient matrix has spectral radius >= 1."""
