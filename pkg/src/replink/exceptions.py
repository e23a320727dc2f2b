"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A scenario or experiment configuration is invalid (e.g. the channel
    support does not fit inside the cyclic prefix)."""


class DegenerateFrameError(ArithmeticError):
    """The equalized gain collapsed to (numerically) zero, so the frame
    carries no usable signal.  Callers may resample the channel or count
    the frame at the chance bit error rate."""
