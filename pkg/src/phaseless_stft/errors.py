"""Exception types shared across the package."""


class PhaselessStftError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(PhaselessStftError, ValueError):
    """Invalid problem geometry or operation arguments."""


class ConditioningError(PhaselessStftError):
    """A linear system was too ill-conditioned to trust."""


class CoverageError(PhaselessStftError):
    """The window never touches some signal entry, so the STFT operator
    lacks full column rank."""


class RecoveryError(PhaselessStftError):
    """No candidate met the residual threshold (non-generic instance or
    insufficient samples)."""


class AmbiguousError(PhaselessStftError):
    """Multiple well-separated candidates met the residual threshold."""
