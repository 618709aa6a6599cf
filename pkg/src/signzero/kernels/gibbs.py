"""Coordinate-wise Gibbs sweeps for N(0, I) truncated to the cone ``S z >= 0``."""
import math

import numpy as np

from .._jit import njit
from .truncnorm import truncnorm_draw

STATUS_OK = 0
STATUS_INFEASIBLE = 1


@njit
def coordinate_bounds(S, z, Sz, i):
    """Truncation interval for coordinate ``i`` given the other coordinates.

    ``Sz`` must equal ``S @ z``.  Rows with a zero coefficient on ``i`` do not
    constrain it.
    """
    lo = -math.inf
    hi = math.inf
    zi = z[i]
    for j in range(S.shape[0]):
        a = S[j, i]
        if a == 0.0:
            continue
        bound = -(Sz[j] - a * zi) / a
        if a > 0.0:
            if bound > lo:
                lo = bound
        elif bound < hi:
            hi = bound
    return lo, hi


@njit
def gibbs_sweeps(S, z, U, tol):
    """Run ``U.shape[0]`` sweeps from ``z`` (updated in place).

    Row ``k`` of ``U`` holds the uniforms for sweep ``k``.  Returns the state
    after every sweep and a status flag (nonzero if some truncation interval
    was empty beyond ``tol``).
    """
    n_sweeps, d = U.shape
    s = S.shape[0]
    out = np.empty((n_sweeps, d))
    Sz = np.empty(s)
    for k in range(n_sweeps):
        for j in range(s):
            acc = 0.0
            for m in range(d):
                acc += S[j, m] * z[m]
            Sz[j] = acc
        for i in range(d):
            lo, hi = coordinate_bounds(S, z, Sz, i)
            if lo < hi:
                x = truncnorm_draw(lo, hi, U[k, i])
            elif lo - hi <= tol * (1.0 + abs(lo)):
                x = 0.5 * (lo + hi)
            else:
                return out[:k], STATUS_INFEASIBLE
            delta = x - z[i]
            if delta != 0.0:
                for j in range(s):
                    Sz[j] += S[j, i] * delta
            z[i] = x
        for m in range(d):
            out[k, m] = z[m]
    return out, STATUS_OK
