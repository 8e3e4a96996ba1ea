"""Kalman filtering and smoothing by incremental QR factorization.

The engine treats the whole filtering/smoothing problem as one big
weighted least-squares system, maintains its triangular factor
incrementally with orthogonal transformations, and reads estimates off
by back substitution.  That buys numerical robustness plus flexibility
that classical covariance-propagation filters lack: state vectors may
change dimension between steps, observations may be missing or stacked
arbitrarily, the initial state needs no prior, old steps can be
forgotten to bound memory, and the filter can roll back to redo steps
once late observations arrive.

Main entry points:

* :class:`~qrkalman.filter.KalmanFilter` with ``evolve`` / ``observe``
  / ``estimate`` / ``smooth`` / ``forget`` / ``rollback``;
* :class:`~qrkalman.covariance.CovarianceSpec` for noise covariances in
  any of four representations;
* :mod:`qrkalman.gls`, a one-shot dense solver of the same problem,
  used as an independent reference;
* :mod:`qrkalman.scenarios`, reproducible example systems, a scenario
  runner, file formats and a performance harness.
"""

from .covariance import (CovarianceSpec, factor_to_covariance,
                         factor_to_sigmas)
from .errors import (FilterStateError, KalmanError,
                     NotPositiveDefiniteError, ScenarioRunError,
                     SingularMatrixError, StepUnavailableError,
                     UnobservableScenarioError)
from .filter import KalmanFilter
from .gls import AssembledSystem, assemble, solve_gls
from .linalg import cholesky_upper, solve_upper_triangular, triangularize
from . import scenarios

__version__ = "0.1.0"

__all__ = [
    "CovarianceSpec", "KalmanFilter",
    "factor_to_covariance", "factor_to_sigmas",
    "AssembledSystem", "assemble", "solve_gls",
    "cholesky_upper", "solve_upper_triangular", "triangularize",
    "KalmanError", "NotPositiveDefiniteError", "SingularMatrixError",
    "FilterStateError", "StepUnavailableError",
    "UnobservableScenarioError", "ScenarioRunError",
    "scenarios",
    "__version__",
]
