# pylint: disable=invalid-name

"""Dense linear-algebra kernel for the filtering engine.

Conventions used by every module in this package: a matrix is a
two-dimensional ``float64`` :class:`numpy.ndarray` stored in row-major
(C) order, a vector is a one-dimensional ``float64`` array.  Matrices
with zero rows are legal and show up routinely (a step that has not
received any observation rows yet).

The orthogonal reductions here apply a transformation jointly to a
stacked block, to companion blocks that share its rows, and to a
right-hand side.  The transformation itself is applied and discarded;
it is never formed into a reusable object by callers.
"""

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefiniteError, SingularMatrixError


def as_matrix(a, name="matrix", require_finite=True):
    """Coerce ``a`` to a 2-D float64 array, validating finiteness."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={m.ndim}")
    if require_finite and m.size and not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(v, name="vector", require_finite=True):
    """Coerce ``v`` to a 1-D float64 array, validating finiteness."""
    a = np.asarray(v, dtype=float)
    if a.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got ndim={a.ndim}")
    if require_finite and a.size and not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    return a


def triangularize(stacked, companions=(), rhs=None):
    """Orthogonally reduce ``stacked`` to upper-triangular form.

    Computes an orthonormal p-by-p transform T with ``T.T @ stacked``
    upper triangular and applies ``T.T`` to every companion block and to
    the right-hand side.  Column Gram matrices are preserved exactly up
    to roundoff, which is the property the engine relies on.

    Parameters
    ----------
    stacked : (p, q) ndarray
        Block to reduce; p >= 1, q >= 1.
    companions : sequence of (p, *) ndarray
        Blocks that share the rows of ``stacked`` and receive the same
        transformation.
    rhs : (p,) ndarray, optional
        Right-hand-side segment transformed along with the blocks.

    Returns
    -------
    r_top : (min(p, q), q) ndarray
        Leading rows of the reduced block (upper triangular when p >= q).
    r_residual : (max(p - q, 0), q) ndarray
        Rows of the reduced block below the triangle (zero by
        construction).
    companions_out : list of ndarray
        The fully transformed companions; callers split them by row
        range.
    rhs_out : ndarray or None
        The fully transformed right-hand side.
    """
    stacked = np.asarray(stacked, dtype=float)
    p, q = stacked.shape
    if p < 1 or q < 1:
        raise ValueError(f"cannot triangularize an empty {p}x{q} block")
    for comp in companions:
        if comp.shape[0] != p:
            raise ValueError(
                f"companion has {comp.shape[0]} rows, stacked block has {p}")
    if rhs is not None and rhs.shape[0] != p:
        raise ValueError(f"rhs has length {rhs.shape[0]}, expected {p}")

    q_full, r = scipy.linalg.qr(stacked, mode="full", check_finite=False)
    k = min(p, q)
    companions_out = [q_full.T @ comp for comp in companions]
    rhs_out = None if rhs is None else q_full.T @ rhs
    return r[:k], r[k:], companions_out, rhs_out


def cholesky_upper(spd):
    """Upper-triangular Cholesky factor U of ``spd`` with U.T @ U = spd.

    Raises
    ------
    NotPositiveDefiniteError
        If a pivot is not positive; the message names the pivot index
        (1-based, as reported by LAPACK).
    """
    a = np.asarray(spd, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        return np.zeros((0, 0))
    u, info = scipy.linalg.lapack.dpotrf(a, lower=0, clean=1, overwrite_a=0)
    if info > 0:
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite (pivot {info})")
    if info < 0:
        raise ValueError(f"invalid input to Cholesky factorization ({info})")
    return u


def solve_upper_triangular(u, rhs):
    """Solve ``u @ x = rhs`` for upper-triangular nonsingular ``u``.

    Raises
    ------
    SingularMatrixError
        If a diagonal entry is exactly zero; the message names the
        index.
    """
    u = np.asarray(u, dtype=float)
    b = np.asarray(rhs, dtype=float)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    if b.shape[0] != u.shape[0]:
        raise ValueError(
            f"rhs length {b.shape[0]} does not match matrix order {u.shape[0]}")
    diag = np.abs(np.diagonal(u))
    if u.shape[0] and diag.min() == 0.0:
        raise SingularMatrixError(
            f"zero pivot at index {int(np.argmin(diag))}")
    if u.shape[0] == 0:
        return np.zeros_like(b)
    return scipy.linalg.solve_triangular(u, b, check_finite=False)
