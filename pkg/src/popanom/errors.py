"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 1,
DataError -> 2, NumericalError -> 3.
"""


class ConfigError(ValueError):
    """Invalid configuration, arguments, or usage."""


class DataError(ValueError):
    """Malformed, empty, or incompatible input data.

    Covers shape mismatches, schema mismatches, unparseable fields, and
    data sets too small for the requested statistic.
    """


class NumericalError(ArithmeticError):
    """Non-finite values where finite arithmetic is required."""
