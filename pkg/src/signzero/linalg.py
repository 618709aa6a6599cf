"""Dense linear-algebra helpers shared by every other module."""
from __future__ import annotations

import numpy as np

from .errors import NotPositiveDefinite, RankDeficient

ZERO_TOL = 1e-10


def _as_rows(A, n: int | None = None) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1) if A.size else np.zeros((0, n or 0))
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {A.shape}")
    return A


def fix_column_signs(N: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry of each is positive."""
    if N.size == 0:
        return N
    idx = np.argmax(np.abs(N), axis=0)
    signs = np.sign(N[idx, np.arange(N.shape[1])])
    signs[signs == 0] = 1.0
    return N * signs


def svd_rank(s: np.ndarray, shape: tuple[int, int]) -> int:
    if s.size == 0:
        return 0
    tol = max(shape) * np.finfo(float).eps * s[0]
    return int(np.sum(s > tol))


def null_space_basis(A, n: int | None = None) -> np.ndarray:
    """Orthonormal basis of ``{x : A x = 0}`` as the columns of an n x (n - r) matrix.

    ``A`` must have full row rank (r < n); otherwise :class:`RankDeficient`.
    An empty ``A`` (shape ``(0, n)``) yields the identity.
    """
    A = _as_rows(A, n)
    r, n = A.shape
    if r == 0:
        return np.eye(n)
    if r >= n:
        raise RankDeficient(f"{r} restrictions leave no null space in R^{n}")
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    rank = svd_rank(s, A.shape)
    if rank < r:
        raise RankDeficient(f"numerical rank {rank} < {r} rows")
    return fix_column_signs(vt[rank:].T.copy())


def change_of_basis(F) -> np.ndarray:
    """Orthonormal K whose first n - r columns span null(F), the rest its complement."""
    F = _as_rows(F)
    N = null_space_basis(F)
    if N.shape[1] == F.shape[1]:
        return N
    comp = null_space_basis(N.T)
    return np.hstack([N, comp])


def cholesky_lower(sigma) -> np.ndarray:
    """Lower Cholesky factor with nonnegative diagonal."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError("covariance must be square")
    if not np.allclose(sigma, sigma.T, rtol=1e-10, atol=1e-12):
        raise NotPositiveDefinite("matrix is not symmetric")
    try:
        L = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    d = np.diag(L)
    scale = np.sqrt(np.max(np.abs(np.diag(sigma)))) if sigma.size else 1.0
    if np.any(~np.isfinite(d)) or np.any(d <= 1e-12 * max(scale, 1e-300)):
        raise NotPositiveDefinite("pivot below tolerance")
    return L


def project_onto_rowspace_complement(V, rows) -> np.ndarray:
    """Project each row of ``V`` onto the orthogonal complement of ``rows``' span.

    Computes ``(I - rows' (rows rows')^{-1} rows) V'`` and returns it transposed
    back, so the output has the shape of ``V``.
    """
    V = np.asarray(V, dtype=float)
    single = V.ndim == 1
    V2 = V.reshape(1, -1) if single else V
    R = _as_rows(rows, V2.shape[1])
    if R.shape[0] == 0:
        return V.copy()
    s = np.linalg.svd(R, compute_uv=False)
    if svd_rank(s, R.shape) < R.shape[0]:
        raise RankDeficient("rows are linearly dependent")
    G = R @ R.T
    coef = np.linalg.solve(G, R @ V2.T)
    out = V2 - (R.T @ coef).T
    return out[0] if single else out


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def is_orthonormal(K, tol: float = ZERO_TOL) -> bool:
    K = np.asarray(K, dtype=float)
    return bool(np.max(np.abs(K.T @ K - np.eye(K.shape[1]))) < tol)


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix)."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d
