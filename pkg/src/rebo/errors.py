"""Exception types shared across the toolkit."""


class ReboError(ValueError):
    """Domain error; the CLI maps it to exit status 1."""


class ChartError(ReboError):
    """A pose or parameter lies outside a coordinate chart."""


class UnreachableError(ReboError):
    """A Cartesian target cannot be produced by in-range actuator lengths."""


class NoFixedPointError(ReboError):
    pass


class ExtrapolationWarning(UserWarning):
    """A value lies outside the experimentally characterized range."""


class ClampWarning(UserWarning):
    """An input was clamped into its admissible interval."""
