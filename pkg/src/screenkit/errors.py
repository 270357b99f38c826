"""Exception hierarchy.  The CLI maps these onto exit codes."""


class ScreenkitError(Exception):
    category = "runtime"


class ConfigError(ScreenkitError, ValueError):
    """Bad configuration: codebook, experiment config, unknown names."""

    category = "config"


class DataError(ScreenkitError, ValueError):
    """Input data cannot support the requested operation."""

    category = "data"


class EmptyCohortError(DataError):
    """A filter left no rows."""
