# pylint: disable=invalid-name

"""Uniform wrapper over the accepted covariance-matrix representations.

Noise covariances enter the engine only through the product of their
inverse factor W (where C = (W.T @ W)^-1) with a matrix or vector.  A
:class:`CovarianceSpec` accepts four representations and exposes that
single ``weigh`` capability:

``"C"``
    an explicit covariance matrix,
``"W"``
    the inverse factor itself,
``"C_inverse"``
    an explicit inverse covariance matrix,
``"w"``
    a vector of diagonal weights, the inverses of the per-component
    standard deviations.

W is only defined up to an orthogonal factor on the left, so the
contract of ``weigh`` is stated on Gram matrices: for any conforming A,
``(W A).T @ (W A)`` equals ``A.T @ inv(C) @ A``.
"""

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefiniteError
from .linalg import as_matrix, as_vector, cholesky_upper

EXPLICIT_C = "C"
INVERSE_FACTOR_W = "W"
INVERSE_C = "C_inverse"
DIAGONAL_WEIGHTS = "w"

_KINDS = (EXPLICIT_C, INVERSE_FACTOR_W, INVERSE_C, DIAGONAL_WEIGHTS)


class CovarianceSpec:
    """One noise covariance in any of the four accepted representations.

    Instances are immutable after construction and validated eagerly:
    singular or indefinite inputs are rejected here rather than
    surfacing later inside a factorization.

    Use the classmethod constructors; the raw ``__init__`` is internal.
    """

    __slots__ = ("kind", "dim", "_data", "_chol", "_weights")

    def __init__(self, kind, dim, data, chol=None, weights=None):
        self.kind = kind
        self.dim = dim
        self._data = data
        self._chol = chol
        self._weights = weights

    @classmethod
    def explicit(cls, C):
        """Covariance given as an explicit SPD matrix."""
        C = as_matrix(C, "C")
        if C.shape[0] != C.shape[1]:
            raise ValueError(f"C must be square, got shape {C.shape}")
        if C.size and not np.allclose(C, C.T, rtol=1e-10, atol=0.0):
            raise ValueError("C must be symmetric")
        chol = cholesky_upper(C)
        return cls(EXPLICIT_C, C.shape[0], C, chol=chol)

    @classmethod
    def inverse_factor(cls, W):
        """Covariance given by its inverse factor, W.T @ W = inv(C).

        W may have more rows than columns; it must have full column
        rank.
        """
        W = as_matrix(W, "W")
        rows, cols = W.shape
        if rows < cols:
            raise ValueError(
                f"inverse factor must have at least as many rows as columns, "
                f"got shape {W.shape}")
        if cols:
            r = scipy.linalg.qr(W, mode="r", check_finite=False)[0]
            d = np.abs(np.diagonal(r))
            if d.min() <= d.max() * np.finfo(float).eps * max(rows, cols):
                raise NotPositiveDefiniteError(
                    "inverse factor is numerically rank deficient")
        return cls(INVERSE_FACTOR_W, cols, W)

    @classmethod
    def inverse(cls, C_inverse):
        """Covariance given as an explicit SPD inverse matrix."""
        Ci = as_matrix(C_inverse, "C_inverse")
        if Ci.shape[0] != Ci.shape[1]:
            raise ValueError(
                f"C_inverse must be square, got shape {Ci.shape}")
        if Ci.size and not np.allclose(Ci, Ci.T, rtol=1e-10, atol=0.0):
            raise ValueError("C_inverse must be symmetric")
        # cholesky_upper gives U with U.T @ U = inv(C), exactly the factor.
        return cls(INVERSE_C, Ci.shape[0], Ci, chol=cholesky_upper(Ci))

    @classmethod
    def diagonal_weights(cls, w):
        """Diagonal covariance given by per-component weights 1/sigma."""
        w = as_vector(w, "w")
        if w.size and w.min() <= 0.0:
            raise ValueError("diagonal weights must be strictly positive")
        return cls(DIAGONAL_WEIGHTS, w.shape[0], w, weights=w)

    @classmethod
    def diagonal_sigmas(cls, sigmas):
        """Diagonal covariance given by per-component standard deviations."""
        s = as_vector(sigmas, "sigmas")
        if s.size and s.min() <= 0.0:
            raise ValueError("standard deviations must be strictly positive")
        return cls(DIAGONAL_WEIGHTS, s.shape[0], 1.0 / s, weights=1.0 / s)

    def weigh(self, x):
        """Multiply the (possibly implicit) inverse factor W by ``x``.

        ``x`` is a matrix with ``self.dim`` rows or a vector of length
        ``self.dim``.  The result satisfies
        ``out.T @ out == x.T @ inv(C) @ x`` up to roundoff.
        """
        a = np.asarray(x, dtype=float)
        if a.shape[0] != self.dim:
            raise ValueError(
                f"weigh expects leading dimension {self.dim}, got {a.shape[0]}")
        if self.kind == DIAGONAL_WEIGHTS:
            if a.ndim == 1:
                return self._weights * a
            return self._weights[:, None] * a
        if self.kind == INVERSE_FACTOR_W:
            return self._data @ a
        if self.kind == INVERSE_C:
            return self._chol @ a
        # explicit C: W = inv(U).T for C = U.T @ U, applied by solving
        # U.T @ out = x.
        if self.dim == 0:
            return a.copy()
        return scipy.linalg.solve_triangular(
            self._chol, a, trans="T", check_finite=False)

    def to_inverse_factor(self):
        """Explicit inverse factor W with W.T @ W = inv(C).

        Upper triangular for the ``"C"`` and ``"C_inverse"`` kinds,
        diagonal for ``"w"``, and the stored matrix as given for
        ``"W"``.
        """
        if self.kind == DIAGONAL_WEIGHTS:
            return np.diag(self._weights)
        if self.kind == INVERSE_FACTOR_W:
            return self._data.copy()
        if self.kind == INVERSE_C:
            return self._chol.copy()
        if self.dim == 0:
            return np.zeros((0, 0))
        w_lower = scipy.linalg.solve_triangular(
            self._chol, np.eye(self.dim), trans="T", check_finite=False)
        # w_lower is inv(U).T; rotate it upper triangular without
        # changing its Gram matrix.
        return scipy.linalg.qr(w_lower, mode="r", check_finite=False)[0]

    def to_json_obj(self):
        """Serialized form used in scenario files."""
        data = self._data
        return {"type": self.kind,
                "data": data.tolist()}

    @classmethod
    def from_json_obj(cls, obj):
        """Inverse of :meth:`to_json_obj`."""
        kind = obj.get("type")
        if kind not in _KINDS:
            raise ValueError(f"unknown covariance type {kind!r}")
        data = obj["data"]
        if kind == EXPLICIT_C:
            return cls.explicit(data)
        if kind == INVERSE_FACTOR_W:
            return cls.inverse_factor(data)
        if kind == INVERSE_C:
            return cls.inverse(data)
        return cls.diagonal_weights(data)

    def __repr__(self):
        return f"CovarianceSpec(kind={self.kind!r}, dim={self.dim})"


def factor_to_covariance(W):
    """Covariance matrix (W.T @ W)^-1 from an inverse factor.

    Returns an all-NaN matrix if the factor carries NaNs (the engine's
    marker for an unobservable state).
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[1]
    if n == 0:
        return np.zeros((0, 0))
    if not np.isfinite(W).all():
        return np.full((n, n), np.nan)
    if W.shape[0] == W.shape[1] and np.allclose(np.tril(W, -1), 0.0):
        inv = scipy.linalg.solve_triangular(
            W, np.eye(n), check_finite=False)
        return inv @ inv.T
    return np.linalg.inv(W.T @ W)


def factor_to_sigmas(W):
    """Per-component standard deviations from an inverse factor."""
    cov = factor_to_covariance(W)
    d = np.diagonal(cov).copy()
    d[d < 0.0] = np.nan
    return np.sqrt(d)
