# pylint: disable=invalid-name

"""Dense generalized-least-squares reference solver.

Assembles the full weighted block system that a scenario's evolution
and observation equations define and solves it in one shot by a dense
orthogonal factorization.  This is deliberately a different algorithm
path from the incremental engine, so agreement between the two is
evidence of correctness rather than a tautology.  Desk scale only: the
assembled matrix is dense and the per-step covariance blocks come from
an explicit inverse of the triangular factor.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import UnobservableScenarioError
from .filter import default_lhs
from .linalg import as_matrix, as_vector


@dataclass
class AssembledSystem:
    """The dense system min ||weight @ (coefficients @ u - rhs)||.

    ``col_offsets[i]:col_offsets[i+1]`` are the columns of step i's
    state; ``row_offsets`` are the boundaries of the equation blocks in
    assembly order (observation of step 0 first, then alternating
    evolution and observation blocks).
    """

    coefficients: np.ndarray
    rhs: np.ndarray
    weight: np.ndarray
    col_offsets: np.ndarray
    row_offsets: np.ndarray
    dims: list


def assemble(steps):
    """Assemble the dense block system for a sequence of step inputs.

    ``steps`` is any sequence of objects with an ``evolution`` attribute
    (None for step 0, else providing ``n_new``, ``F``, ``c``, ``K`` and
    optionally ``H``) and an ``observation`` attribute (None or
    providing ``G``, ``o``, ``C``), e.g.
    :class:`~qrkalman.scenarios.StepInput`.
    """
    steps = list(steps)
    if not steps:
        raise ValueError("cannot assemble an empty step sequence")

    dims = []
    for i, step in enumerate(steps):
        evo = step.evolution
        if i == 0:
            if evo is not None:
                raise ValueError("step 0 must not have an evolution")
            obs = step.observation
            if obs is not None:
                dims.append(as_matrix(obs.G, "G").shape[1])
            elif len(steps) > 1 and steps[1].evolution is not None:
                dims.append(as_matrix(steps[1].evolution.F, "F").shape[1])
            else:
                raise ValueError(
                    "cannot determine the dimension of step 0")
        else:
            if evo is None:
                raise ValueError(f"step {i} is missing its evolution")
            dims.append(int(evo.n_new))

    col_offsets = np.concatenate([[0], np.cumsum(dims)])
    total_cols = int(col_offsets[-1])

    blocks = []          # (weighted rows check) unweighted coefficient rows
    rhs_parts = []
    weight_blocks = []
    row_offsets = [0]

    def add_block(rows, rhs_part, weight):
        blocks.append(rows)
        rhs_parts.append(rhs_part)
        weight_blocks.append(weight)
        row_offsets.append(row_offsets[-1] + rows.shape[0])

    for i, step in enumerate(steps):
        if i > 0:
            evo = step.evolution
            F = as_matrix(evo.F, "F")
            c = as_vector(evo.c, "c")
            rows = F.shape[0]
            if F.shape[1] != dims[i - 1]:
                raise ValueError(
                    f"step {i}: F has {F.shape[1]} columns, expected "
                    f"{dims[i - 1]}")
            H = evo.H
            if H is None:
                H = default_lhs(rows, dims[i])
            else:
                H = as_matrix(H, "H")
                if H.shape != (rows, dims[i]):
                    raise ValueError(
                        f"step {i}: H has shape {H.shape}, expected "
                        f"({rows}, {dims[i]})")
            block = np.zeros((rows, total_cols))
            block[:, col_offsets[i - 1]:col_offsets[i]] = -F
            block[:, col_offsets[i]:col_offsets[i + 1]] = H
            add_block(block, c, evo.K.to_inverse_factor())
        obs = step.observation
        if obs is not None:
            G = as_matrix(obs.G, "G")
            o = as_vector(obs.o, "o")
            if G.shape[1] != dims[i]:
                raise ValueError(
                    f"step {i}: G has {G.shape[1]} columns, expected "
                    f"{dims[i]}")
            block = np.zeros((G.shape[0], total_cols))
            block[:, col_offsets[i]:col_offsets[i + 1]] = G
            add_block(block, o, obs.C.to_inverse_factor())

    A = np.vstack(blocks)
    b = np.concatenate(rhs_parts)
    weight = scipy.linalg.block_diag(*weight_blocks)
    return AssembledSystem(
        coefficients=A, rhs=b, weight=weight,
        col_offsets=col_offsets, row_offsets=np.asarray(row_offsets),
        dims=dims)


def solve_gls(system):
    """Solve the assembled system; per-step estimates and covariances.

    The estimate is the minimizer of ``||U (A u - b)||_2`` computed via
    a QR factorization of ``U @ A`` (never the normal equations); the
    per-step covariance blocks are the diagonal blocks of
    ``inv(A.T U.T U A)``, obtained from the triangular factor.

    Raises
    ------
    UnobservableScenarioError
        If the weighted matrix is numerically rank deficient.
    """
    B = system.weight @ system.coefficients
    bw = system.weight @ system.rhs
    q, r = scipy.linalg.qr(B, mode="economic", check_finite=False)
    d = np.abs(np.diagonal(r))
    if d.size == 0 or d.min() <= d.max() * max(B.shape) * np.finfo(float).eps:
        raise UnobservableScenarioError(
            "unobservable scenario: the assembled system is rank deficient")
    u = scipy.linalg.solve_triangular(r, q.T @ bw, check_finite=False)
    r_inv = scipy.linalg.solve_triangular(
        r, np.eye(r.shape[0]), check_finite=False)
    cov = r_inv @ r_inv.T

    offsets = system.col_offsets
    estimates = []
    covariances = []
    for i in range(len(system.dims)):
        lo, hi = offsets[i], offsets[i + 1]
        estimates.append(u[lo:hi])
        covariances.append(cov[lo:hi, lo:hi])
    return estimates, covariances
