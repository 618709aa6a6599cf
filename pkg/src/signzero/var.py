"""Reduced-form VAR: data container, OLS, diffuse NIW posterior, impulse responses."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InsufficientData, SingularDesign
from .linalg import cholesky_lower, svd_rank


@dataclass(frozen=True)
class VarData:
    """Observations ``Y`` (rows are periods) plus lag order and constant flag."""

    Y: np.ndarray
    p: int
    labels: tuple[str, ...] = ()
    include_constant: bool = True
    dates: tuple[str, ...] | None = None

    def __post_init__(self):
        Y = np.asarray(self.Y, dtype=float)
        if Y.ndim != 2:
            raise ValueError("Y must be T x n")
        object.__setattr__(self, "Y", Y)
        if not np.all(np.isfinite(Y)):
            raise ValueError("Y contains missing or non-finite values")
        if self.p < 1:
            raise ValueError("lag order must be >= 1")
        labels = tuple(self.labels) or tuple(f"y{i + 1}" for i in range(Y.shape[1]))
        if len(labels) != Y.shape[1] or len(set(labels)) != len(labels):
            raise ValueError("labels must be distinct, one per column")
        object.__setattr__(self, "labels", labels)
        if self.T <= self.n * self.p + 1:
            raise InsufficientData(f"T={self.T} must exceed n*p+1={self.n * self.p + 1}")

    @property
    def n(self) -> int:
        return self.Y.shape[1]

    @property
    def T(self) -> int:
        """Effective sample length (observations after the initial lags)."""
        return self.Y.shape[0] - self.p

    @property
    def k(self) -> int:
        return self.n * self.p + int(self.include_constant)

    def regressors(self) -> tuple[np.ndarray, np.ndarray]:
        """``(Yt, X)`` with rows t = p..end; X holds lags 1..p then the constant."""
        Y, p = self.Y, self.p
        T = self.T
        blocks = [Y[p - l:p - l + T] for l in range(1, p + 1)]
        if self.include_constant:
            blocks.append(np.ones((T, 1)))
        return Y[p:], np.hstack(blocks)

    def sample_dates(self) -> tuple[str, ...] | None:
        return None if self.dates is None else tuple(self.dates[self.p:])


@dataclass(frozen=True)
class ReducedFormParams:
    """Coefficients ``B`` (n x k, lag blocks then constant) and covariance."""

    B: np.ndarray
    sigma: np.ndarray
    p: int
    include_constant: bool = True
    sigma_tr: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        sigma = 0.5 * (sigma + sigma.T)
        n = sigma.shape[0]
        if B.shape != (n, n * self.p + int(self.include_constant)):
            raise ValueError(f"B has shape {B.shape}, expected ({n}, {n * self.p + int(self.include_constant)})")
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "sigma_tr", cholesky_lower(sigma))

    @property
    def n(self) -> int:
        return self.sigma.shape[0]

    def lag(self, l: int) -> np.ndarray:
        """Lag-coefficient block B_l, l = 1..p."""
        n = self.n
        return self.B[:, (l - 1) * n:l * n]

    def companion(self) -> np.ndarray:
        n, p = self.n, self.p
        C = np.zeros((n * p, n * p))
        C[:n] = self.B[:, :n * p]
        if p > 1:
            C[n:, :-n] = np.eye(n * (p - 1))
        return C

    def is_stable(self) -> bool:
        return bool(np.max(np.abs(np.linalg.eigvals(self.companion()))) < 1.0)

    def long_run_matrix(self) -> np.ndarray:
        """``I - sum_l B_l``."""
        return np.eye(self.n) - sum(self.lag(l) for l in range(1, self.p + 1))

    def sigma_tr_inv(self) -> np.ndarray:
        return np.linalg.solve(self.sigma_tr, np.eye(self.n))

    def innovations(self, data: VarData) -> np.ndarray:
        Yt, X = data.regressors()
        return Yt - X @ self.B.T


@dataclass(frozen=True)
class StructuralView:
    Q: np.ndarray
    A0: np.ndarray
    Aplus: np.ndarray


def structural_view(params: ReducedFormParams, Q) -> StructuralView:
    Q = np.asarray(Q, dtype=float)
    A0 = Q.T @ params.sigma_tr_inv()
    return StructuralView(Q=Q, A0=A0, Aplus=A0 @ params.B)


@dataclass(frozen=True)
class IrfCoefficients:
    C: np.ndarray  # (H + 1, n, n)

    @property
    def horizon_max(self) -> int:
        return self.C.shape[0] - 1

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.C, axis=0)


def ols_estimate(data: VarData) -> ReducedFormParams:
    """Least-squares coefficients; residual covariance divided by T - k."""
    Yt, X = data.regressors()
    s = np.linalg.svd(X, compute_uv=False)
    if svd_rank(s, X.shape) < X.shape[1] or s[-1] < 1e-10 * s[0]:
        raise SingularDesign("regressor matrix is numerically singular")
    coef, *_ = np.linalg.lstsq(X, Yt, rcond=None)
    resid = Yt - X @ coef
    dof = data.T - data.k
    if dof <= 0:
        raise InsufficientData("no residual degrees of freedom")
    return ReducedFormParams(coef.T, resid.T @ resid / dof, data.p, data.include_constant)


@dataclass(frozen=True)
class NiwPosterior:
    """Sufficient statistics of the diffuse normal-inverse-Wishart posterior."""

    B_hat: np.ndarray  # n x k
    xtx_inv_chol: np.ndarray  # k x k lower factor of (X'X)^{-1}
    scale: np.ndarray  # residual sum of squares, n x n
    dof: int
    p: int
    include_constant: bool

    @classmethod
    def from_data(cls, data: VarData) -> "NiwPosterior":
        Yt, X = data.regressors()
        dof = data.T - data.k
        if dof <= data.n + 1:
            raise InsufficientData(f"T - k = {dof} must exceed n + 1 = {data.n + 1}")
        s = np.linalg.svd(X, compute_uv=False)
        if svd_rank(s, X.shape) < X.shape[1] or s[-1] < 1e-10 * s[0]:
            raise SingularDesign("regressor matrix is numerically singular")
        xtx = X.T @ X
        B_hat = np.linalg.solve(xtx, X.T @ Yt).T
        resid = Yt - X @ B_hat.T
        xtx_inv = np.linalg.solve(xtx, np.eye(xtx.shape[0]))
        return cls(
            B_hat=B_hat,
            xtx_inv_chol=np.linalg.cholesky(0.5 * (xtx_inv + xtx_inv.T)),
            scale=resid.T @ resid,
            dof=dof,
            p=data.p,
            include_constant=data.include_constant,
        )

    def draw(self, rng: np.random.Generator) -> ReducedFormParams:
        sigma = inverse_wishart_draw(self.scale, self.dof, rng)
        L = np.linalg.cholesky(sigma)
        Z = rng.standard_normal(self.B_hat.shape[::-1])  # k x n
        Bt = self.B_hat.T + self.xtx_inv_chol @ Z @ L.T
        return ReducedFormParams(Bt.T, sigma, self.p, self.include_constant)


def inverse_wishart_draw(scale, dof: float, rng: np.random.Generator) -> np.ndarray:
    """Draw from IW(scale, dof) via the Bartlett decomposition of its inverse."""
    scale = np.asarray(scale, dtype=float)
    n = scale.shape[0]
    # W ~ Wishart(scale^{-1}, dof) = (L A)(L A)'; Sigma = W^{-1}
    L = np.linalg.cholesky(np.linalg.solve(scale, np.eye(n)))
    A = np.zeros((n, n))
    A[np.diag_indices(n)] = np.sqrt(rng.chisquare(dof - np.arange(n)))
    A[np.tril_indices(n, -1)] = rng.standard_normal(n * (n - 1) // 2)
    LA_inv = np.linalg.solve(L @ A, np.eye(n))
    sigma = LA_inv.T @ LA_inv
    return 0.5 * (sigma + sigma.T)


def posterior_draw_niw(data: VarData, rng: np.random.Generator,
                       require_stable: bool = False, max_tries: int = 1000,
                       posterior: NiwPosterior | None = None) -> ReducedFormParams:
    """One independent draw of (B, Sigma) under the diffuse NIW prior.

    ``require_stable`` discards explosive draws (off by default).
    """
    post = posterior or NiwPosterior.from_data(data)
    for _ in range(max_tries):
        params = post.draw(rng)
        if not require_stable or params.is_stable():
            return params
    raise InsufficientData(f"no stable draw in {max_tries} tries")


def irf_coefficients(params: ReducedFormParams, H: int) -> IrfCoefficients:
    """``C_0 = I``, ``C_h = sum_{l <= min(h, p)} B_l C_{h-l}``."""
    if H < 0:
        raise ValueError("horizon must be >= 0")
    n, p = params.n, params.p
    C = np.zeros((H + 1, n, n))
    C[0] = np.eye(n)
    blocks = [params.lag(l) for l in range(1, p + 1)]
    for h in range(1, H + 1):
        acc = np.zeros((n, n))
        for l in range(1, min(h, p) + 1):
            acc += blocks[l - 1] @ C[h - l]
        C[h] = acc
    return IrfCoefficients(C)


def response_weights(params: ReducedFormParams, irf: IrfCoefficients, i: int, h: int,
                     cumulative: bool = False) -> np.ndarray:
    """Vector w with ``eta = w' q`` for the response of variable i at horizon h."""
    Ch = irf.C[: h + 1].sum(axis=0) if cumulative else irf.C[h]
    return Ch[i] @ params.sigma_tr


def impulse_response(params: ReducedFormParams, irf: IrfCoefficients, q, i: int, h: int,
                     cumulative: bool = False) -> float:
    if h > irf.horizon_max:
        raise ValueError(f"horizon {h} beyond computed maximum {irf.horizon_max}")
    return float(response_weights(params, irf, i, h, cumulative) @ np.asarray(q, dtype=float))


def simulate_var(B, sigma, T: int, rng: np.random.Generator, burn: int = 200,
                 include_constant: bool = True) -> np.ndarray:
    """Simulate ``T`` observations from a VAR with coefficients ``B``."""
    B = np.asarray(B, dtype=float)
    n = B.shape[0]
    p = (B.shape[1] - int(include_constant)) // n
    L = np.linalg.cholesky(np.asarray(sigma, dtype=float))
    const = B[:, -1] if include_constant else np.zeros(n)
    y = np.zeros((T + burn + p, n))
    shocks = rng.standard_normal((T + burn + p, n)) @ L.T
    for t in range(p, T + burn + p):
        acc = const + shocks[t]
        for l in range(1, p + 1):
            acc = acc + B[:, (l - 1) * n:l * n] @ y[t - l]
        y[t] = acc
    return y[burn + p:]


def label_index(labels: Sequence[str], name) -> int:
    if isinstance(name, (int, np.integer)):
        return int(name)
    lowered = [lab.lower() for lab in labels]
    try:
        return lowered.index(str(name).lower())
    except ValueError:
        raise KeyError(f"unknown variable {name!r}; have {list(labels)}") from None
