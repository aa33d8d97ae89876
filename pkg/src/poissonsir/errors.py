"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument or model lies outside the domain an operation supports."""


class DivergentMomentError(DomainError):
    """A requested fractional moment does not exist (the integral diverges)."""


class EmptyConditioningError(DomainError):
    """A conditional moment was requested on an event of probability zero."""


class EmptyNetworkError(DomainError):
    """Scheduling thinned the transmitter process down to intensity zero."""


class UnsupportedModelError(DomainError):
    """The model is outside the regime a closed form is valid for."""


class InterpolationRangeError(DomainError):
    """A CCDF curve was queried outside the intensity range it covers."""


class StepSizeError(DomainError):
    """A finite-difference step underflowed or left the evaluable range."""


class DegenerateConfigurationError(RuntimeError):
    """Repeated resampling failed to produce a usable realization."""


class NoInteriorMaximumError(RuntimeError):
    """The throughput curve is monotone on the search interval."""

    def __init__(self, side: str):
        self.side = side
        super().__init__(
            f"throughput capacity has no interior maximum: "
            f"the grid argmax sits on the {side} bound"
        )


class ConfigError(ValueError):
    """A model/run configuration could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
