"""Exception and warning types used across the package."""


class SquidGatesError(Exception):
    """Base class for all package errors."""


class ParameterError(SquidGatesError):
    """Physical device parameters are missing, inconsistent, or out of range."""


class ConfigurationError(SquidGatesError):
    """Grid, schedule, or solver settings violate a documented constraint."""


class DegenerateLandscapeError(SquidGatesError):
    """The potential surface does not have the expected four-well structure."""


class LabelingError(SquidGatesError):
    """No eigenstate is sufficiently localized to carry a computational label."""


class SolverError(SquidGatesError):
    """An eigensolver failed to converge or returned an inconsistent solution."""


class CalibrationError(SquidGatesError):
    """Pulse calibration could not extract a clean Rabi frequency."""


class IntegratorInstabilityError(SquidGatesError):
    """Norm drift during propagation exceeded the allowed tolerance."""


class NumericalError(SquidGatesError):
    """A dense linear-algebra kernel failed (details in the message)."""


class LeakageWarning(UserWarning):
    """Leakage out of the computational subspace is large enough to distort results."""
