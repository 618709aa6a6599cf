"""Emptiness of the identified set.

The main test inscribes the largest ball in ``{c : S_bar c >= 0, |c_i| <= 1}``;
a positive radius certifies an interior point and gives a feasible start.
Two slower checks (random search and vertex enumeration) serve as oracles.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from . import kernels
from .errors import CombinationBudgetExceeded, DegenerateCenter, Infeasible, SignZeroError, Unbounded
from .kernels.simplex import INFEASIBLE, ITERATION_LIMIT, UNBOUNDED
from .linalg import null_space_basis
from .restrictions import RestrictionSystem
from .transform import TransformedSystem, pull_back

RADIUS_TOL = 1e-9
NONEMPTY = "NonEmpty"
EMPTY = "Empty"
PRESUMED_EMPTY = "PresumedEmpty"


@dataclass(frozen=True)
class LinearProgram:
    """``max c'x`` subject to ``A_ub x <= b_ub`` and ``lower <= x <= upper``.

    Bounds default to ``0 <= x < inf``; use ``-inf`` for free variables.
    """

    c: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        nvar = c.shape[0]
        if nvar < 1:
            raise ValueError("a linear program needs at least one variable")
        A = np.asarray(self.A_ub, dtype=float).reshape(-1, nvar)
        b = np.atleast_1d(np.asarray(self.b_ub, dtype=float))
        if b.shape[0] != A.shape[0]:
            raise ValueError("A_ub and b_ub row counts differ")
        lo = np.zeros(nvar) if self.lower is None else np.broadcast_to(np.asarray(self.lower, float), (nvar,)).copy()
        hi = np.full(nvar, np.inf) if self.upper is None else np.broadcast_to(np.asarray(self.upper, float), (nvar,)).copy()
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("LP coefficients must be finite")
        if np.any(np.isposinf(lo)) or np.any(np.isneginf(hi)) or np.any(lo > hi):
            raise ValueError("inconsistent variable bounds")
        for name, val in (("c", c), ("A_ub", A), ("b_ub", b), ("lower", lo), ("upper", hi)):
            object.__setattr__(self, name, val)

    @property
    def nvar(self) -> int:
        return self.c.shape[0]


def solve_lp(lp: LinearProgram, max_iter: int | None = None) -> tuple[np.ndarray, float]:
    """Optimal basic solution and value, via the dense simplex kernel."""
    n = lp.nvar
    # x = shift + T y with y >= 0; a free variable becomes y+ - y-
    cols = []
    shift = np.zeros(n)
    for i in range(n):
        if np.isfinite(lp.lower[i]):
            shift[i] = lp.lower[i]
            cols.append((i, 1.0))
        elif np.isfinite(lp.upper[i]):
            shift[i] = lp.upper[i]
            cols.append((i, -1.0))
        else:
            cols.append((i, 1.0))
            cols.append((i, -1.0))
    T = np.zeros((n, len(cols)))
    for j, (i, sgn) in enumerate(cols):
        T[i, j] = sgn
    rows = [lp.A_ub @ T]
    rhs = [lp.b_ub - lp.A_ub @ shift]
    both = np.isfinite(lp.lower) & np.isfinite(lp.upper)
    for i in np.flatnonzero(both):
        rows.append(T[i][None, :])
        rhs.append(np.array([lp.upper[i] - lp.lower[i]]))
    A = np.ascontiguousarray(np.vstack(rows))
    b = np.concatenate(rhs)
    c = lp.c @ T
    if max_iter is None:
        max_iter = 50 * (A.shape[0] + A.shape[1]) + 1000
    status, y, _ = kernels.simplex(A, b, c, max_iter)
    if status == INFEASIBLE:
        raise Infeasible("linear program has no feasible point")
    if status == UNBOUNDED:
        raise Unbounded("linear program is unbounded")
    if status == ITERATION_LIMIT:
        raise SignZeroError(f"simplex hit the iteration limit ({max_iter})")
    x = shift + T @ y
    return x, float(lp.c @ x)


@dataclass(frozen=True)
class ChebyshevResult:
    radius: float
    center: np.ndarray
    status: str
    q0_bar: np.ndarray | None = None
    q0: np.ndarray | None = None

    @property
    def nonempty(self) -> bool:
        return self.status == NONEMPTY


def chebyshev_lp(S_bar: np.ndarray) -> LinearProgram:
    """Variables ``(c, R)``: max R with ``a_k'c - R >= 0`` for unit rows a_k and ``|c_i| + R <= 1``."""
    s, d = S_bar.shape
    A_rows = S_bar / np.linalg.norm(S_bar, axis=1, keepdims=True)
    A = np.zeros((s + 2 * d, d + 1))
    A[:s, :d] = -A_rows
    A[:s, d] = 1.0
    A[s:s + d, :d] = np.eye(d)
    A[s + d:, :d] = -np.eye(d)
    A[s:, d] = 1.0
    b = np.concatenate([np.zeros(s), np.ones(2 * d)])
    c = np.zeros(d + 1)
    c[d] = 1.0
    lower = np.concatenate([np.full(d, -1.0), [0.0]])
    upper = np.concatenate([np.ones(d), [1.0]])
    return LinearProgram(c, A, b, lower, upper)


def chebyshev_check(ts: TransformedSystem, radius_tol: float = RADIUS_TOL) -> ChebyshevResult:
    d = ts.d
    if ts.s == 0:
        # every sign row vanished on the hyperplane: the whole subsphere is feasible
        c = np.zeros(d)
        c[0] = 1.0
        return ChebyshevResult(1.0, c, NONEMPTY, c, pull_back(ts, c))
    x, R = solve_lp(chebyshev_lp(ts.S_bar))
    c = x[:d]
    if R <= radius_tol:
        return ChebyshevResult(max(R, 0.0), c, EMPTY)
    nc = np.linalg.norm(c)
    if nc < 1e-12:
        raise DegenerateCenter(f"radius {R:.3g} with a centre at the origin")
    q0_bar = c / nc
    return ChebyshevResult(R, c, NONEMPTY, q0_bar, pull_back(ts, q0_bar))


@dataclass(frozen=True)
class RejectionCheck:
    status: str
    draws: int
    witness: np.ndarray | None = None

    @property
    def nonempty(self) -> bool:
        return self.status == NONEMPTY


def _hyperplane_draws(system: RestrictionSystem, N: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """m uniform unit vectors on ``{F q = 0}`` with the sign normalisation imposed."""
    z = rng.standard_normal((m, system.n))
    q = (z @ N) @ N.T
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    flip = q @ system.S[0] < 0
    q[flip] *= -1.0
    return q


def rejection_emptiness_check(system: RestrictionSystem, rng: np.random.Generator,
                              max_draws: int = 100_000, batch: int = 10_000) -> RejectionCheck:
    """Search for a feasible q by uniform draws; ``PresumedEmpty`` if none turns up."""
    if max_draws < 1:
        raise ValueError("max_draws must be >= 1")
    N = null_space_basis(system.F, system.n)
    used = 0
    while used < max_draws:
        m = min(batch, max_draws - used)
        q = _hyperplane_draws(system, N, m, rng)
        ok = np.all(q @ system.S.T >= 0.0, axis=1)
        if ok.any():
            i = int(np.argmax(ok))
            return RejectionCheck(NONEMPTY, used + i + 1, q[i])
        used += m
    return RejectionCheck(PRESUMED_EMPTY, used)


def vertex_combination_count(s: int, d: int) -> int:
    return comb(s, d - 1)


def active_set_combination_count(s: int, d: int) -> int:
    return sum(comb(s, k) for k in range(d))


@dataclass(frozen=True)
class VertexCheck:
    status: str
    checked: int
    vertex_bar: np.ndarray | None = None

    @property
    def nonempty(self) -> bool:
        return self.status == NONEMPTY


def vertex_emptiness_check(ts: TransformedSystem, budget: int = 10_000_000, tol: float = 1e-9) -> VertexCheck:
    """Look for a feasible point where d - 1 sign rows bind (tried with both signs)."""
    S = ts.S_unit
    s, d = S.shape
    count = vertex_combination_count(s, d)
    if count > budget:
        raise CombinationBudgetExceeded(count, budget, "vertex subsets")
    if s == 0:
        v = np.eye(d)[0]
        return VertexCheck(NONEMPTY, 0, v)
    sv = np.linalg.svd(S, compute_uv=False)
    if int(np.sum(sv > 1e-10 * max(sv[0], 1.0))) < d:
        # the rows leave a common null direction, which satisfies every row with equality
        v = np.linalg.svd(S)[2][-1]
        return VertexCheck(NONEMPTY, 1, v)
    if d == 1:
        for sign in (1.0, -1.0):
            if np.all(S[:, 0] * sign >= -tol):
                return VertexCheck(NONEMPTY, 1, np.array([sign]))
        return VertexCheck(EMPTY, 1)
    found, v, checked = kernels.find_vertex(np.ascontiguousarray(S), tol)
    if found:
        return VertexCheck(NONEMPTY, int(checked), v)
    return VertexCheck(EMPTY, int(checked))
