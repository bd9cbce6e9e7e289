"""Small dense linear-algebra kernels used by the minimal solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import EigenFailure, PivotSingular, RankDegenerate, SingularCalibration

GAP_RATIO_MIN = 10.0


@dataclass(frozen=True)
class EigenPairSet:
    """Eigenvalues with eigenvectors stored column-wise."""

    values: np.ndarray
    vectors: np.ndarray

    def __len__(self):
        return len(self.values)


def nullspace(M, expected_dim, *, check=True):
    """Orthonormal basis (as columns) of the numerical null space of ``M``.

    Takes the ``expected_dim`` right singular vectors with the smallest
    singular values and returns ``(basis, gap_ratio)``, the ratio between the
    last kept and first dropped singular values. Raises
    :class:`RankDegenerate` when the gap ratio is below 10.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    m, n = M.shape
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    basis = Vt[n - expected_dim :].T
    if s.size == 0 or s[0] == 0.0:
        return basis, np.inf
    sig = np.zeros(n)
    sig[: s.size] = s
    floor = np.finfo(float).eps * s[0]
    k = n - expected_dim
    gap = sig[k - 1] / max(sig[k], floor) if k > 0 else np.inf
    if check and gap < GAP_RATIO_MIN:
        raise RankDegenerate(f"null space gap ratio {gap:.3g} below {GAP_RATIO_MIN}")
    return basis, gap


def gauss_jordan_eliminate(A, pivot_cols):
    """Reduce ``A`` so that ``pivot_cols`` form an identity block.

    Rows are reordered so the pivot rows come first, in the order of
    ``pivot_cols``; the remaining rows have zeros in every pivot column.
    Pivots are chosen by magnitude among the rows not yet used.
    """
    A = np.array(A, dtype=float)
    m = A.shape[0]
    free = list(range(m))
    order = []
    for col in pivot_cols:
        cand = np.array(free)
        row = cand[np.argmax(np.abs(A[cand, col]))]
        piv = A[row, col]
        if abs(piv) < 1e-12 * max(np.linalg.norm(A[row]), 1e-300):
            raise PivotSingular(f"vanishing pivot in column {col}")
        A[row] /= piv
        others = np.arange(m) != row
        A[others] -= np.outer(A[others, col], A[row])
        A[others, col] = 0.0
        A[row, col] = 1.0
        free.remove(row)
        order.append(row)
    return A[order + free]


def solve_gep(A0, A1):
    """Finite eigenpairs of ``A0 x = q A1 x``.

    Infinite eigenvalues (vanishing homogeneous denominator) are dropped.
    """
    A0 = np.asarray(A0, dtype=float)
    A1 = np.asarray(A1, dtype=float)
    if A0.shape != A1.shape or A0.shape[0] != A0.shape[1]:
        raise ValueError("solve_gep expects two square matrices of equal size")
    try:
        ab, X = scipy.linalg.eig(A0, A1, homogeneous_eigvals=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenFailure(str(exc)) from exc
    alpha, beta = ab
    finite = np.abs(beta) > 1e-13 * np.maximum(np.abs(alpha), np.finfo(float).tiny)
    q = alpha[finite] / beta[finite]
    return EigenPairSet(q, X[:, finite])


def eig(A):
    """Standard eigenpairs of a square matrix."""
    try:
        vals, vecs = np.linalg.eig(np.asarray(A, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    return EigenPairSet(vals, vecs)


def rq_decompose(P):
    """Split ``P ~ K [R | -R C]`` into calibration, rotation and center.

    ``K`` is upper triangular with positive diagonal and ``K[2, 2] = 1``; the
    overall sign of ``P`` is chosen so that ``det(R) = +1``, which makes
    points in front of the camera have positive third coordinate.
    """
    P = np.asarray(P, dtype=float)
    M = P[:, :3]
    if abs(np.linalg.det(M)) < 1e-12 * max(np.linalg.norm(M), 1e-300) ** 3:
        raise SingularCalibration("leading 3x3 block is singular")
    K, R = scipy.linalg.rq(M)
    D = np.diag(np.sign(np.diag(K)))
    K = K @ D
    R = D @ R
    if np.linalg.det(R) < 0:
        R = -R
    C = -np.linalg.solve(M, P[:, 3])
    return K / K[2, 2], R, C
