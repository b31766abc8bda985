"""Exception hierarchy shared across the library and the CLI exit-code map."""


class WeakclockError(Exception):
    """Base class for all library-specific failures."""


class ConfigError(WeakclockError):
    """Invalid run configuration (CLI exit code 2)."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        prefix = ""
        if key is not None:
            prefix = f"{key}: "
            if line is not None:
                prefix = f"{key} (line {line}): "
        super().__init__(prefix + message)


class NumericError(WeakclockError):
    """Numerical failure or internal inconsistency (CLI exit code 3)."""


class DegenerateFrequencyError(NumericError):
    """Closed-form expression undefined because a required sine of the accumulated phase vanishes."""


class SizeGuardError(WeakclockError):
    """Refused before compute: the request would enumerate or allocate too much (CLI exit code 4)."""
