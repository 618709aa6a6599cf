"""Subset enumeration over sign-restriction rows in the reduced space.

Both kernels expect the rows of ``S`` normalised to unit length.
"""
import numpy as np

from .._jit import njit


@njit
def _next_combination(idx, s):
    k = idx.shape[0]
    i = k - 1
    while i >= 0 and idx[i] == s - k + i:
        i -= 1
    if i < 0:
        return False
    idx[i] += 1
    for j in range(i + 1, k):
        idx[j] = idx[j - 1] + 1
    return True


@njit
def _feasible(S, v, tol):
    for j in range(S.shape[0]):
        acc = 0.0
        for m in range(S.shape[1]):
            acc += S[j, m] * v[m]
        if acc < -tol:
            return False
    return True


@njit
def find_vertex(S, tol):
    """Search all (d-1)-subsets of rows for a feasible unit null vector.

    Returns ``(found, vertex, subsets_checked)``.
    """
    s, d = S.shape
    k = d - 1
    vertex = np.zeros(d)
    checked = 0
    if k > s:
        return False, vertex, checked
    idx = np.arange(k)
    sub = np.empty((k, d))
    while True:
        checked += 1
        for a in range(k):
            for m in range(d):
                sub[a, m] = S[idx[a], m]
        _, sv, vt = np.linalg.svd(sub)
        if sv[k - 1] > 1e-10 * max(sv[0], 1.0):
            for sign in (1.0, -1.0):
                for m in range(d):
                    vertex[m] = sign * vt[d - 1, m]
                if _feasible(S, vertex, tol):
                    return True, vertex, checked
        if not _next_combination(idx, s):
            break
    return False, np.zeros(d), checked


@njit
def _consider(S, W, c, tol, lower, upper, arg_lo, arg_hi):
    if not _feasible(S, c, tol):
        return
    d = c.shape[0]
    for q in range(W.shape[0]):
        val = 0.0
        for m in range(d):
            val += W[q, m] * c[m]
        if val > upper[q]:
            upper[q] = val
            arg_hi[q, :] = c
        if val < lower[q]:
            lower[q] = val
            arg_lo[q, :] = c


@njit
def _face_candidates(S, W, N, tol, lower, upper, arg_lo, arg_hi):
    d, dim = N.shape
    c = np.empty(d)
    for q in range(W.shape[0]):
        coef = N.T @ W[q]
        pw = N @ coef
        nrm = np.sqrt(np.sum(pw * pw))
        if nrm > 1e-12:
            for sign in (1.0, -1.0):
                c[:] = sign * pw / nrm
                _consider(S, W, c, tol, lower, upper, arg_lo, arg_hi)
        elif dim == 1:
            for sign in (1.0, -1.0):
                c[:] = sign * N[:, 0]
                _consider(S, W, c, tol, lower, upper, arg_lo, arg_hi)


@njit
def active_set_bounds(S, W, tol):
    """Extremes of ``w' q`` over ``{|q| = 1, S q >= 0}`` for every row w of W.

    Enumerates every subset of at most d - 1 binding rows; the optimum of a
    linear objective on the face where a subset binds is the normalised
    projection of w onto that face's span (either sign), or the face itself
    when it is a single ray.
    """
    s, d = S.shape
    nq = W.shape[0]
    lower = np.full(nq, np.inf)
    upper = np.full(nq, -np.inf)
    arg_lo = np.zeros((nq, d))
    arg_hi = np.zeros((nq, d))
    _face_candidates(S, W, np.eye(d), tol, lower, upper, arg_lo, arg_hi)
    checked = 1
    for k in range(1, min(d - 1, s) + 1):
        idx = np.arange(k)
        sub = np.empty((k, d))
        while True:
            checked += 1
            for a in range(k):
                for m in range(d):
                    sub[a, m] = S[idx[a], m]
            _, sv, vt = np.linalg.svd(sub)
            if sv[k - 1] > 1e-10 * max(sv[0], 1.0):
                N = np.ascontiguousarray(vt[k:].T)
                _face_candidates(S, W, N, tol, lower, upper, arg_lo, arg_hi)
            if not _next_combination(idx, s):
                break
    return lower, upper, arg_lo, arg_hi, checked
