"""Shared exception types.

Every error raised deliberately by this package derives from VcouplerError,
so callers (including the CLI) can distinguish usage problems from bugs.
"""


class VcouplerError(Exception):
    """Base class for all errors raised by vcoupler."""


class ZeroPolynomial(VcouplerError, ValueError):
    """An operation that needs a nonzero polynomial received the zero polynomial."""


class InvalidInterval(VcouplerError, ValueError):
    """Interval endpoints are out of order or otherwise unusable."""


class NonPositiveCoefficient(VcouplerError, ValueError):
    """A test that requires strictly positive coefficients saw one <= 0."""


class NoImaginaryPole(VcouplerError, ValueError):
    """Residue conditions were requested for a denominator with no imaginary-axis pole."""


class InvalidParams(VcouplerError, ValueError):
    """Physical or coupler parameters violate their sign/range constraints."""


class ConfigError(VcouplerError, ValueError):
    """A configuration mapping could not be parsed into parameters."""


class PoleAtFrequency(VcouplerError, ValueError):
    """Frequency-domain evaluation was requested exactly at a pole."""


class DegenerateTermination(VcouplerError, ValueError):
    """The environment termination makes the interconnection ill-posed."""


class DesiredExceedsCoupler(VcouplerError, ValueError):
    """A desired rendered parameter meets or exceeds what the coupler can pass."""


class BaselineNotPassive(VcouplerError, ValueError):
    """Coupler optimization is undefined because the plant-side conditions fail."""
