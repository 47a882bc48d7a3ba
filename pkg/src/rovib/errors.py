"""Exception taxonomy shared across the package."""


class RovibError(Exception):
    """Base class for package errors."""


class ConfigError(RovibError):
    """Invalid configuration or unknown model/curve kind."""


class CurveDomainError(RovibError):
    """Curve evaluated outside its declared radial domain."""


class TableFormatError(RovibError):
    """Malformed tabulated-curve file; carries a line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)


class CalibrationError(RovibError):
    """Model or pulse calibration failed to converge; carries achieved values."""

    def __init__(self, message, achieved=None):
        self.achieved = achieved or {}
        if self.achieved:
            message = f"{message}; achieved {self.achieved}"
        super().__init__(message)


class ShapeMismatchError(RovibError):
    """Wavepacket does not match the grid/channel layout of an operator."""


class StateLookupError(RovibError):
    """Requested (nu, N) state is not present in the eigen library."""


class SpectralWindowError(RovibError):
    """Chebyshev recursion diverged: energy window does not bracket H."""


class NumericalError(RovibError):
    """NaN or diagonalization failure; carries a step index when known."""

    def __init__(self, message, step=None):
        self.step = step
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)


class EnsembleCoverageError(RovibError):
    """Thermal averaging is missing ensemble members; lists the gaps."""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"missing ensemble members: {self.missing}")


class EmptyTableError(RovibError):
    """Mean of an empty distribution is undefined."""
