"""Dense two-phase tableau simplex for ``max c'x  s.t.  A x <= b, x >= 0``.

Dantzig pricing by default; after a run of degenerate pivots the solver
switches to Bland's rule for the rest of the solve, which rules out cycling.
"""
import numpy as np

from .._jit import njit

OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2
ITERATION_LIMIT = 3

_PIV_TOL = 1e-11
_COST_TOL = 1e-11
_FEAS_TOL = 1e-9
_DEGENERATE_RUN = 50


@njit
def _pivot(T, basis, row, col):
    T[row, :] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row:
            f = T[i, col]
            if f != 0.0:
                T[i, :] -= f * T[row, :]
    basis[row] = col


@njit
def _price(T, basis, cost, barred):
    m = T.shape[0] - 1
    ncols = T.shape[1] - 1
    for j in range(ncols + 1):
        T[m, j] = 0.0
    for j in range(ncols):
        T[m, j] = -cost[j]
    for i in range(m):
        cb = cost[basis[i]]
        if cb != 0.0:
            for j in range(ncols + 1):
                T[m, j] += cb * T[i, j]
    for j in range(ncols):
        if barred[j]:
            T[m, j] = 0.0


@njit
def _iterate(T, basis, barred, max_iter):
    m = T.shape[0] - 1
    ncols = T.shape[1] - 1
    bland = False
    degenerate = 0
    for _ in range(max_iter):
        col = -1
        best = -_COST_TOL
        for j in range(ncols):
            if barred[j]:
                continue
            rc = T[m, j]
            if rc < -_COST_TOL:
                if bland:
                    col = j
                    break
                if rc < best:
                    best = rc
                    col = j
        if col < 0:
            return OPTIMAL
        row = -1
        ratio = np.inf
        for i in range(m):
            a = T[i, col]
            if a > _PIV_TOL:
                r = T[i, ncols] / a
                if r < ratio - 1e-14 or (abs(r - ratio) <= 1e-14 and row >= 0 and basis[i] < basis[row]):
                    ratio = r
                    row = i
        if row < 0:
            return UNBOUNDED
        if ratio <= 1e-14:
            degenerate += 1
            if degenerate > _DEGENERATE_RUN:
                bland = True
        else:
            degenerate = 0
        _pivot(T, basis, row, col)
    return ITERATION_LIMIT


@njit
def simplex(A, b, c, max_iter):
    """Solve the LP; returns ``(status, x, value)``."""
    m, nvar = A.shape
    n_art = 0
    for i in range(m):
        if b[i] < 0.0:
            n_art += 1
    ncols = nvar + m + n_art
    T = np.zeros((m + 1, ncols + 1))
    basis = np.empty(m, dtype=np.int64)
    is_art = np.zeros(ncols, dtype=np.bool_)
    art = nvar + m
    for i in range(m):
        if b[i] >= 0.0:
            T[i, :nvar] = A[i]
            T[i, nvar + i] = 1.0
            T[i, ncols] = b[i]
            basis[i] = nvar + i
        else:
            T[i, :nvar] = -A[i]
            T[i, nvar + i] = -1.0
            T[i, art] = 1.0
            T[i, ncols] = -b[i]
            basis[i] = art
            is_art[art] = True
            art += 1

    barred = np.zeros(ncols, dtype=np.bool_)
    if n_art > 0:
        cost1 = np.zeros(ncols)
        for j in range(ncols):
            if is_art[j]:
                cost1[j] = -1.0
        _price(T, basis, cost1, barred)
        status = _iterate(T, basis, barred, max_iter)
        if status == ITERATION_LIMIT:
            return status, np.zeros(nvar), 0.0
        if T[m, ncols] < -_FEAS_TOL:
            return INFEASIBLE, np.zeros(nvar), 0.0
        # drive zero-level artificials out of the basis
        for i in range(m):
            if is_art[basis[i]]:
                for j in range(nvar + m):
                    if abs(T[i, j]) > _PIV_TOL:
                        _pivot(T, basis, i, j)
                        break
        for j in range(ncols):
            if is_art[j]:
                barred[j] = True

    cost2 = np.zeros(ncols)
    cost2[:nvar] = c
    _price(T, basis, cost2, barred)
    status = _iterate(T, basis, barred, max_iter)
    x = np.zeros(nvar)
    for i in range(m):
        if basis[i] < nvar:
            x[basis[i]] = T[i, ncols]
    value = 0.0
    for j in range(nvar):
        value += c[j] * x[j]
    return status, x, value
