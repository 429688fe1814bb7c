"""Exception types shared across the pipeline.

Each class maps to one CLI exit code (see cli.EXIT_CODES), so error paths
stay distinguishable end to end.
"""


class MapperScopeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(MapperScopeError):
    """Invalid or inconsistent run configuration."""


class InputError(MapperScopeError):
    """An input file is missing, unreadable, or malformed."""


class DataError(MapperScopeError):
    """Well-formed inputs that violate a data contract (missing region, zero population, ...)."""


class CoverError(MapperScopeError):
    """Degenerate ranges or invalid cover parameters."""


class GraphError(MapperScopeError):
    """Invalid queries against a Mapper graph (unknown node, unknown column, empty graph)."""


class DiffError(MapperScopeError):
    """Two run directories cannot be structurally compared."""


class CalibrationError(MapperScopeError):
    """No scanned (n, p) pair met the connectivity target.

    Carries the full scan table so the caller can inspect what was tried.
    """

    def __init__(self, message, scan=None):
        super().__init__(message)
        self.scan = scan if scan is not None else []
