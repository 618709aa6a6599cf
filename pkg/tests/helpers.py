"""Random instances shared by the test modules."""
import numpy as np

from signzero.restrictions import RestrictionSystem
from signzero.var import ReducedFormParams


def random_params(n, p, rng, scale=0.4, constant=True):
    """A stable reduced form with a well-conditioned covariance."""
    while True:
        B = scale * rng.standard_normal((n, n * p)) / np.sqrt(n * p)
        if constant:
            B = np.hstack([B, rng.standard_normal((n, 1))])
        A = rng.standard_normal((n, n))
        sigma = A @ A.T + n * np.eye(n)
        params = ReducedFormParams(B, sigma, p, constant)
        if params.is_stable():
            return params


def planted_system(n, r, s, rng, margin=0.3):
    """Zero rows F and s sign rows all satisfied with slack by a planted unit q*."""
    F = rng.standard_normal((r, n))
    N = np.linalg.svd(F)[2][r:].T if r else np.eye(n)
    q = N @ rng.standard_normal(N.shape[1])
    q /= np.linalg.norm(q)
    rows = []
    while len(rows) < s:
        a = rng.standard_normal(n)
        a_bar = N @ (N.T @ a)
        if a @ q >= margin * np.linalg.norm(a_bar):
            rows.append(a)
        elif -a @ q >= margin * np.linalg.norm(a_bar):
            rows.append(-a)
    return RestrictionSystem(F, np.array(rows)), q


def empty_system(n, r, s, rng):
    """A sign system that is empty by construction.

    Within null(F), rows a_1..a_m (m <= d) plus -(c_1 a_1 + ... + c_m a_m) with
    c > 0 admit only points where all of them vanish; making the a_i span
    null(F) (m = d) leaves just the origin.
    """
    F = rng.standard_normal((r, n))
    N = np.linalg.svd(F)[2][r:].T if r else np.eye(n)
    d = N.shape[1]
    A = rng.standard_normal((d, d)) @ N.T
    c = rng.uniform(0.5, 2.0, d)
    rows = [a for a in A] + [-(c @ A)]
    while len(rows) < s:
        rows.append(rng.standard_normal(n))
    rows = np.array(rows)
    rows = rows[rng.permutation(len(rows))]
    return RestrictionSystem(F, rows)


def uniform_sphere(m, d, rng):
    z = rng.standard_normal((m, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)
