"""Exception types shared across the package."""


class KalmanError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefiniteError(KalmanError):
    """A matrix that must be symmetric positive definite is not."""


class SingularMatrixError(KalmanError):
    """A triangular solve hit a zero pivot."""


class FilterStateError(KalmanError):
    """An operation was called in a state that does not allow it."""


class StepUnavailableError(KalmanError):
    """The requested step is forgotten, in the future, or not yet smoothed."""


class UnobservableScenarioError(KalmanError):
    """The assembled least-squares system does not have full column rank."""


class ScenarioRunError(KalmanError):
    """A scenario run failed; the message carries the step or command."""
