"""Exception types shared across the package."""

from __future__ import annotations


class TqgError(Exception):
    """Base class for package-specific failures.

    ``module`` and ``operation`` identify where the failure happened so the
    CLI can emit a machine-readable error record.
    """

    module = "tqg"
    operation = ""

    def __init__(self, message: str, *, module: str | None = None, operation: str | None = None):
        super().__init__(message)
        if module is not None:
            self.module = module
        if operation is not None:
            self.operation = operation


class GridMismatchError(TqgError):
    """Two fields living on different grids were combined."""

    module = "spectral"


class GevreyOverflowError(TqgError):
    """An exponential weight left the representable floating-point range."""

    module = "norms"


class BlowUpError(TqgError):
    """Integration produced non-finite coefficients or runaway norm growth."""

    module = "integrate"

    def __init__(self, message: str, s: float | None = None):
        super().__init__(message)
        self.s = s


class CalibrationError(TqgError):
    """No constant on the calibration grid satisfies the growth bounds."""

    module = "tracker"

    def __init__(self, message: str, worst_run: str | None = None):
        super().__init__(message)
        self.worst_run = worst_run


class ConfigError(TqgError):
    """A configuration file failed validation."""

    module = "config"
