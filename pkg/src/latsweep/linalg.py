"""Dense-matrix utilities: pseudoinverse, rank, nullspaces, weighted Gram.

Everything is SVD-based so rank-deficient matrices are handled uniformly.
Matrices are plain 2-d ``numpy`` arrays; vectors are 1-d arrays.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError

#: Default relative cutoff on singular values, sized for double precision
#: and lattice matrices with entries of order one.
DEFAULT_RANK_TOL = 1e-10


def _check_matrix(A: np.ndarray, rank_tol: float) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise InvalidInputError(f"expected a 2-d array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has non-finite entries")
    if not rank_tol > 0:
        raise InvalidInputError("rank_tol must be positive")
    return A


def pseudoinverse(A: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse with a relative singular-value cutoff."""
    A = _check_matrix(A, rank_tol)
    if A.size == 0:
        return np.zeros((A.shape[1], A.shape[0]))
    u, s, vt = np.linalg.svd(A, full_matrices=False)
    cutoff = rank_tol * (s[0] if s.size else 0.0)
    inv = np.where(s > cutoff, np.divide(1.0, s, where=s > 0), 0.0)
    return (vt.T * inv) @ u.T


def numerical_rank(A: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of singular values above ``rank_tol`` times the largest one."""
    A = _check_matrix(A, rank_tol)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_tol * s[0]))


def nullspace_basis(A: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the kernel of ``A`` as columns.

    Returns an ``n x 0`` array when the kernel is trivial.  Columns carry a
    deterministic sign: the entry of largest magnitude is positive.
    """
    A = _check_matrix(A, rank_tol)
    n = A.shape[1]
    if A.size == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    cutoff = rank_tol * (s[0] if s.size and s[0] > 0 else 0.0)
    rank = int(np.count_nonzero(s > cutoff)) if s.size else 0
    N = vt[rank:].T.copy()
    for j in range(N.shape[1]):
        col = N[:, j]
        lead = np.argmax(np.abs(col))
        if col[lead] < 0:
            N[:, j] = -col
    return N


def weighted_gram(V: np.ndarray, K: np.ndarray) -> np.ndarray:
    """Gram matrix ``V^T K V`` of the columns of ``V`` under weights ``K``.

    ``K`` may be a full matrix or a 1-d array of diagonal weights.  The
    result is explicitly symmetrized.
    """
    V = np.asarray(V, dtype=float)
    K = np.asarray(K, dtype=float)
    if K.ndim == 1:
        if K.shape[0] != V.shape[0]:
            raise InvalidInputError(
                f"weight length {K.shape[0]} does not match {V.shape[0]} rows"
            )
        G = V.T @ (K[:, None] * V)
    else:
        if K.shape != (V.shape[0], V.shape[0]):
            raise InvalidInputError(
                f"weight shape {K.shape} does not match {V.shape[0]} rows"
            )
        G = V.T @ K @ V
    return 0.5 * (G + G.T)
