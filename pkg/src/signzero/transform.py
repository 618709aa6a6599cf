"""Elimination of zero restrictions.

With ``K = [N(F), N(N(F)')]``, every q with ``F q = 0`` is ``K[:, :d] q_bar``
for a unique ``q_bar`` in R^d (``d = n - r``) of the same norm, and the sign
rows act on ``q_bar`` through the first d coordinates of ``S K``.  Samplers
and feasibility checks work on the resulting pure-sign system.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRowWarning, DimensionError, NotInHyperplane
from .linalg import change_of_basis, project_onto_rowspace_complement
from .restrictions import RestrictionSystem, check_full_row_rank

DROP_TOL = 1e-12


@dataclass(frozen=True)
class TransformedSystem:
    K: np.ndarray
    S_bar: np.ndarray
    r: int
    n: int
    F: np.ndarray
    F_tilde: np.ndarray
    S_tilde: np.ndarray
    kept_rows: tuple[int, ...]
    dropped_rows: tuple[int, ...] = ()

    @property
    def d(self) -> int:
        return self.n - self.r

    @property
    def s(self) -> int:
        return self.S_bar.shape[0]

    @property
    def basis(self) -> np.ndarray:
        """First d columns of K: an orthonormal basis of null(F)."""
        return self.K[:, : self.d]

    @property
    def S_unit(self) -> np.ndarray:
        """``S_bar`` with rows scaled to unit length (same cone)."""
        if self.s == 0:
            return self.S_bar.copy()
        return self.S_bar / np.linalg.norm(self.S_bar, axis=1, keepdims=True)


def reduce(system: RestrictionSystem, allow_point: bool = False) -> TransformedSystem:
    """Rewrite ``(F, S)`` on R^n as a sign-only system on R^(n - r)."""
    F, S = system.F, system.S
    n, r = system.n, system.r
    if r >= n - 1 and not (allow_point and r == n - 1):
        raise DimensionError(f"r = {r} zero restrictions in R^{n} leave at most one direction")
    check_full_row_rank(F)
    K = change_of_basis(F)
    d = n - r
    F_tilde = F @ K
    S_tilde = S @ K
    proj = project_onto_rowspace_complement(S_tilde, F_tilde) if r else S_tilde.copy()
    if r and np.max(np.abs(proj[:, d:]), initial=0.0) > 1e-10:
        raise DimensionError("projected sign rows leak outside the first n - r coordinates")
    S_bar = proj[:, :d]
    norms = np.linalg.norm(S_bar, axis=1)
    scale = np.maximum(np.linalg.norm(S, axis=1), 1.0)
    keep = norms >= DROP_TOL * scale
    kept = tuple(int(i) for i in np.flatnonzero(keep))
    dropped = tuple(int(i) for i in np.flatnonzero(~keep))
    if dropped:
        warnings.warn(
            f"sign rows {list(dropped)} vanish on the zero-restriction hyperplane and were dropped",
            DegenerateRowWarning,
            stacklevel=2,
        )
    return TransformedSystem(
        K=K,
        S_bar=np.ascontiguousarray(S_bar[keep]),
        r=r,
        n=n,
        F=F,
        F_tilde=F_tilde,
        S_tilde=S_tilde,
        kept_rows=kept,
        dropped_rows=dropped,
    )


def push_forward(ts: TransformedSystem, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if ts.r and np.linalg.norm(ts.F @ q) > 1e-8:
        raise NotInHyperplane(f"|F q| = {np.linalg.norm(ts.F @ q):.3g}")
    return ts.basis.T @ q


def pull_back(ts: TransformedSystem, q_bar) -> np.ndarray:
    """Map reduced coordinates back to R^n; accepts a vector or rows of vectors."""
    q_bar = np.asarray(q_bar, dtype=float)
    return q_bar @ ts.basis.T
