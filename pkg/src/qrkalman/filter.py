# pylint: disable=invalid-name, too-many-instance-attributes

"""Incremental Kalman filter and smoother built on QR factorization.

The engine maintains the upper block-bidiagonal R factor of the
weighted least-squares system that accumulates one evolution equation
and (optionally) one observation equation per time step, together with
the correspondingly transformed right-hand side.  Each step contributes
a diagonal block and a coupling block to the next step's state; once a
later step arrives, the earlier block row is sealed and never changes
again.  Estimates come from back substitution through those blocks, and
estimate covariances are returned as upper-triangular inverse factors W
with cov = inv(W.T @ W).

Supported flows on one :class:`KalmanFilter` instance:

* filtering: ``observe`` step 0, then ``evolve`` + ``observe`` each
  later step, reading ``estimate()`` as you go;
* prediction: ``evolve`` followed by an empty ``observe()``;
* whole-track or fixed-lag smoothing: ``smooth()`` at any point, then
  ``estimate(i)`` for any retained step;
* bounded memory: ``forget(i)`` drops block rows of steps <= i;
* late or corrected observations: ``rollback(i)`` restores step i to
  its pre-observation state and discards everything after it.

States whose accumulated diagonal block is not square (not enough
observation rows yet) are reported as NaN vectors with NaN covariance
diagonals rather than raising.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .covariance import CovarianceSpec
from .errors import FilterStateError, StepUnavailableError
from .linalg import as_matrix, as_vector, triangularize


def default_lhs(rows, new_dim):
    """Default left-hand mapping for an evolution with no explicit one.

    Identity when dimensions match; identity padded with zero columns
    when the state grows (the new components carry no history).  A
    shrinking state needs an explicit mapping.
    """
    if rows > new_dim:
        raise ValueError(
            f"an explicit H is required when the evolution has more rows "
            f"({rows}) than the new state has components ({new_dim})")
    return np.eye(rows, new_dim)


def _nan_estimate(dim):
    return np.full(dim, np.nan), np.diag(np.full(dim, np.nan))


def _solve_estimate(dim, block, rhs):
    """Back-substitute one diagonal block, NaN on flat or zero pivot."""
    if block.shape[0] < dim or (
            dim and np.abs(np.diagonal(block)).min() == 0.0):
        return _nan_estimate(dim)
    x = scipy.linalg.solve_triangular(block, rhs[:dim], check_finite=False)
    return x, block


@dataclass
class StepRecord:
    """A sealed block row of the factorization.

    ``diag_block`` is square upper triangular for an observable step and
    flat (fewer rows than ``dim``) for a step that can never be
    estimated on its own; ``super_block`` couples this step's equations
    to the next state; ``rhs`` is the matching transformed right-hand
    side segment.  ``pre_obs_block``/``pre_obs_rhs`` snapshot the step's
    own pre-observation bottom row so the filter can roll back to it.
    """

    index: int
    dim: int
    diag_block: np.ndarray
    super_block: np.ndarray
    rhs: np.ndarray
    pre_obs_block: np.ndarray
    pre_obs_rhs: np.ndarray
    smoothed_state: Optional[np.ndarray] = field(default=None, repr=False)
    smoothed_factor: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass
class _PendingStep:
    """The bottom, still mutable, block row of the factorization."""

    index: int
    dim: Optional[int]               # None until a first evolve fixes it
    pre_obs_block: Optional[np.ndarray]
    pre_obs_rhs: Optional[np.ndarray]
    observed: bool = False
    post_obs_block: Optional[np.ndarray] = None
    post_obs_rhs: Optional[np.ndarray] = None
    pred_block: Optional[np.ndarray] = None   # lazily triangularized
    pred_rhs: Optional[np.ndarray] = None


class KalmanFilter:
    """Linear Kalman filter/smoother with a QR-factorized state.

    A filter instance is a single-writer object: the mutating
    operations (``evolve``, ``observe``, ``forget``, ``rollback``,
    ``smooth``) require exclusive access, while reading estimates after
    a ``smooth`` may happen concurrently.  Distinct instances are fully
    independent.
    """

    def __init__(self):
        self._records = []            # sealed steps, consecutive indices
        self._pending = None
        self._version = 0             # bumped by estimate-changing ops
        self._smoothed_version = -1   # version at the last smooth()

    # ------------------------------------------------------------------
    # stepping

    def observe(self, G=None, o=None, C=None):
        """Provide the observation of the current step, or declare none.

        For the very first step this creates step 0 (which has no
        evolution).  ``G`` is the m-by-n observation matrix, ``o`` the
        length-m observation vector and ``C`` a
        :class:`~qrkalman.covariance.CovarianceSpec` for the measurement
        noise with ``dim == m``.  Call with no arguments when the step
        has no observation.
        """
        given = [G is not None, o is not None, C is not None]
        if any(given) and not all(given):
            raise ValueError("G, o and C must be given together or all omitted")

        if self._pending is None:
            if G is None:
                # Observation-free first step: its dimension is fixed by
                # the first evolution.
                self._pending = _PendingStep(
                    index=0, dim=None, pre_obs_block=None, pre_obs_rhs=None,
                    observed=True)
                self._version += 1
                return
            G = as_matrix(G, "G")
            if G.shape[1] < 1:
                raise ValueError("G must have at least one column")
            n0 = G.shape[1]
            self._pending = _PendingStep(
                index=0, dim=n0,
                pre_obs_block=np.zeros((0, n0)), pre_obs_rhs=np.zeros(0))

        p = self._pending
        if p.observed:
            raise FilterStateError(f"step {p.index} was already observed")
        n = p.dim

        if G is None:
            # No observation: the prediction block, triangularized when
            # it is square or tall, becomes the step's final block.
            if p.pre_obs_block.shape[0] >= n:
                self._ensure_prediction(p)
                p.post_obs_block = p.pred_block
                p.post_obs_rhs = p.pred_rhs
            else:
                p.post_obs_block = p.pre_obs_block
                p.post_obs_rhs = p.pre_obs_rhs
            p.observed = True
            self._version += 1
            return

        G = as_matrix(G, "G")
        o = as_vector(o, "o")
        if G.shape[0] < 1:
            raise ValueError("G must have at least one row")
        if G.shape[1] != n:
            raise ValueError(
                f"G has {G.shape[1]} columns, state dimension is {n}")
        if o.shape[0] != G.shape[0]:
            raise ValueError(
                f"o has length {o.shape[0]}, G has {G.shape[0]} rows")
        if not isinstance(C, CovarianceSpec):
            raise ValueError("C must be a CovarianceSpec")
        if C.dim != G.shape[0]:
            raise ValueError(
                f"C has dimension {C.dim}, expected {G.shape[0]}")

        WG = C.weigh(G)
        Wo = C.weigh(o)
        stack = np.vstack([p.pre_obs_block, WG])
        rhs = np.concatenate([p.pre_obs_rhs, Wo])
        if stack.shape[0] < n:
            p.post_obs_block = stack
            p.post_obs_rhs = rhs
        else:
            r_top, _, _, rhs_t = triangularize(stack, (), rhs)
            p.post_obs_block = r_top
            p.post_obs_rhs = rhs_t[:n]
        p.observed = True
        self._version += 1

    def evolve(self, n_new, F, c, K, H=None):
        """Advance to the next step through an evolution equation.

        The equation is ``H @ u_new = F @ u_prev + c + noise`` with
        ``noise`` covariance described by ``K``.  ``n_new`` is the
        dimension of the new state; when ``H`` is omitted it defaults to
        an identity, zero-padded on the right if the state grows.
        Sealing the previous step's block row happens here.
        """
        if self._pending is None:
            raise FilterStateError(
                "evolve() before any step; the first step starts with "
                "observe()")
        p = self._pending
        if not p.observed:
            raise FilterStateError(
                f"step {p.index} is awaiting its observation; call observe() "
                f"(with no arguments if there is none)")
        n_new = int(n_new)
        if n_new < 1:
            raise ValueError("n_new must be at least 1")
        F = as_matrix(F, "F")
        c = as_vector(c, "c")
        rows = F.shape[0]
        if rows < 1:
            raise ValueError("F must have at least one row")
        if p.dim is None:
            # Step 0 was observation-free; its dimension comes from F.
            p.dim = F.shape[1]
            p.pre_obs_block = np.zeros((0, p.dim))
            p.pre_obs_rhs = np.zeros(0)
            p.post_obs_block = p.pre_obs_block
            p.post_obs_rhs = p.pre_obs_rhs
        n_prev = p.dim
        if F.shape[1] != n_prev:
            raise ValueError(
                f"F has {F.shape[1]} columns, previous state dimension "
                f"is {n_prev}")
        if c.shape[0] != rows:
            raise ValueError(f"c has length {c.shape[0]}, F has {rows} rows")
        if H is None:
            H = default_lhs(rows, n_new)
        else:
            H = as_matrix(H, "H")
            if H.shape != (rows, n_new):
                raise ValueError(
                    f"H has shape {H.shape}, expected ({rows}, {n_new})")
        if not isinstance(K, CovarianceSpec):
            raise ValueError("K must be a CovarianceSpec")
        if K.dim != rows:
            raise ValueError(f"K has dimension {K.dim}, expected {rows}")

        VF = K.weigh(F)
        VH = K.weigh(H)
        Vc = K.weigh(c)
        top = p.post_obs_block
        stack = np.vstack([top, -VF])
        companion = np.vstack([np.zeros((top.shape[0], n_new)), VH])
        rhs = np.concatenate([p.post_obs_rhs, Vc])

        if stack.shape[0] < n_prev:
            # The stacked block is flat: the previous step is sealed as
            # is and can never be estimated; the new step starts with an
            # empty block.
            record = StepRecord(
                index=p.index, dim=n_prev, diag_block=stack,
                super_block=companion, rhs=rhs,
                pre_obs_block=p.pre_obs_block, pre_obs_rhs=p.pre_obs_rhs)
            bar = np.zeros((0, n_new))
            bar_rhs = np.zeros(0)
        else:
            r_top, _, (comp_t,), rhs_t = triangularize(
                stack, (companion,), rhs)
            record = StepRecord(
                index=p.index, dim=n_prev, diag_block=r_top,
                super_block=comp_t[:n_prev], rhs=rhs_t[:n_prev],
                pre_obs_block=p.pre_obs_block, pre_obs_rhs=p.pre_obs_rhs)
            bar = comp_t[n_prev:]
            bar_rhs = rhs_t[n_prev:]

        self._records.append(record)
        self._pending = _PendingStep(
            index=p.index + 1, dim=n_new,
            pre_obs_block=bar, pre_obs_rhs=bar_rhs)
        self._version += 1

    # ------------------------------------------------------------------
    # estimates

    def estimate(self, index=None):
        """Estimated state vector and covariance inverse factor.

        With no ``index`` (or the latest index) this returns the
        filtered estimate of the current step, or its prediction if the
        step has not been observed yet.  Earlier retained steps require
        a prior :meth:`smooth` and return the smoothed estimate.

        Returns
        -------
        x : (n,) ndarray
            The estimate; all-NaN when the state is not observable.
        W : (n, n) ndarray
            Upper-triangular inverse factor of the estimate covariance,
            cov = inv(W.T @ W); a matrix with NaN diagonal when the
            state is not observable.
        """
        self._require_steps()
        p = self._pending
        if index is None or index == p.index:
            if p.dim is None:
                raise FilterStateError(
                    "the dimension of step 0 is undetermined; provide an "
                    "observation or an evolution first")
            if p.observed:
                return _solve_estimate(p.dim, p.post_obs_block,
                                       p.post_obs_rhs)
            if p.pre_obs_block.shape[0] >= p.dim:
                self._ensure_prediction(p)
                return _solve_estimate(p.dim, p.pred_block, p.pred_rhs)
            return _nan_estimate(p.dim)

        index = int(index)
        if index > p.index:
            raise StepUnavailableError(
                f"step {index} is beyond the latest step {p.index}")
        if index < self.earliest():
            raise StepUnavailableError(f"step {index} has been forgotten")
        if self._smoothed_version != self._version:
            raise StepUnavailableError(
                f"step {index} is not smoothed; call smooth() first")
        record = self._records[index - self._records[0].index]
        return record.smoothed_state, record.smoothed_factor

    def smooth(self):
        """Compute smoothed estimates and covariances for all retained steps.

        Works on copies of the retained blocks, so filtering can
        continue afterwards and smoothing can be repeated once more
        observations arrive.  Steps below an unobservable block come out
        as NaN.
        """
        self._require_steps()
        p = self._pending
        if p.dim is None:
            raise FilterStateError(
                "the dimension of step 0 is undetermined; nothing to smooth")
        if not p.observed:
            raise FilterStateError(
                f"step {p.index} is awaiting its observation; call observe() "
                f"(with no arguments if there is none) before smooth()")

        x, W = _solve_estimate(p.dim, p.post_obs_block, p.post_obs_rhs)
        broken = not np.isfinite(x).all()
        sweep = None if broken else p.post_obs_block
        x_next = x

        for record in reversed(self._records):
            n = record.dim
            if broken or record.diag_block.shape[0] < n or (
                    np.abs(np.diagonal(record.diag_block)).min() == 0.0):
                broken = True
                record.smoothed_state, record.smoothed_factor = \
                    _nan_estimate(n)
                x_next = record.smoothed_state
                continue
            x_i = scipy.linalg.solve_triangular(
                record.diag_block,
                record.rhs - record.super_block @ x_next,
                check_finite=False)
            # One stage of the covariance sweep: reduce the stacked
            # coupling column and carry the diagonal block along; the
            # bottom square of the transformed diagonal block is the
            # inverse factor of this step's smoothed covariance.
            stackc = np.vstack([record.super_block, sweep])
            carried = np.vstack(
                [record.diag_block, np.zeros((sweep.shape[0], n))])
            _, _, (carried_t,), _ = triangularize(stackc, (carried,))
            sweep = carried_t[stackc.shape[1]:]
            w_i, _, _, _ = triangularize(sweep)
            record.smoothed_state = x_i
            record.smoothed_factor = w_i
            x_next = x_i

        self._smoothed_version = self._version

    # ------------------------------------------------------------------
    # memory management

    def forget(self, index):
        """Drop the block rows of all steps up to and including ``index``.

        Retained estimates are unaffected.  At least one sealed step
        must remain, and a forgotten step can never be smoothed or
        rolled back to again.
        """
        self._require_steps()
        index = int(index)
        if not self._records:
            raise FilterStateError("there are no sealed steps to forget")
        first = self._records[0].index
        last_sealed = self._records[-1].index
        if index < first:
            raise StepUnavailableError(
                f"step {index} was already forgotten")
        if index >= last_sealed:
            raise FilterStateError(
                f"cannot forget through step {index}: the latest sealed step "
                f"({last_sealed}) and the current step must be retained")
        del self._records[:index - first + 1]

    def rollback(self, index):
        """Restore step ``index`` to its pre-observation state.

        All later steps are discarded; the step becomes the current one,
        awaiting its (new) observation.  Rolling back to a forgotten
        step is impossible.
        """
        self._require_steps()
        index = int(index)
        p = self._pending
        if index > p.index:
            raise StepUnavailableError(
                f"step {index} is beyond the latest step {p.index}")
        if index < self.earliest():
            raise StepUnavailableError(
                f"step {index} has been forgotten and cannot be rolled "
                f"back to")
        if index == p.index:
            p.post_obs_block = None
            p.post_obs_rhs = None
            p.pred_block = None
            p.pred_rhs = None
            p.observed = False
        else:
            record = self._records[index - self._records[0].index]
            del self._records[index - self._records[0].index:]
            self._pending = _PendingStep(
                index=index, dim=record.dim,
                pre_obs_block=record.pre_obs_block,
                pre_obs_rhs=record.pre_obs_rhs)
        self._version += 1

    # ------------------------------------------------------------------
    # bookkeeping

    def earliest(self):
        """Index of the earliest retained step."""
        self._require_steps()
        if self._records:
            return self._records[0].index
        return self._pending.index

    def latest(self):
        """Index of the latest (current) step."""
        self._require_steps()
        return self._pending.index

    def _require_steps(self):
        if self._pending is None:
            raise FilterStateError("the filter has no steps")

    @staticmethod
    def _ensure_prediction(p):
        if p.pred_block is None:
            r_top, _, _, rhs_t = triangularize(
                p.pre_obs_block, (), p.pre_obs_rhs)
            p.pred_block = r_top
            p.pred_rhs = rhs_t[:p.dim]
