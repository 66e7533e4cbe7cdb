"""Exception types raised across the package."""


class FrameAliasError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(FrameAliasError, ValueError):
    """Shapes, lengths or strides are inconsistent."""


class ResourceLimitError(FrameAliasError):
    """A dense computation was requested above the size guard."""


class DegenerateResponseError(FrameAliasError):
    """The filterbank response vanishes somewhere (min G_0 <= 0)."""


class UndefinedObjectiveError(FrameAliasError):
    """An objective is undefined for the given filterbank (e.g. not a frame)."""


class InvalidStateError(FrameAliasError):
    """An iterative procedure was started from an unusable state."""


class GuaranteeVoidError(FrameAliasError):
    """The perturbation guarantee does not apply to the given values."""

    def __init__(self, message, *, lower, update_upper, step):
        super().__init__(message)
        self.lower = lower
        self.update_upper = update_upper
        self.step = step


class UnsupportedSpecError(FrameAliasError):
    """The closed form is not available for the requested distribution."""


class InapplicableReductionError(FrameAliasError):
    """The precondition of a structural reduction is violated."""
