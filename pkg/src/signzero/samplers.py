"""Draws from the uniform distribution over the identified set.

The Gibbs sampler updates one coordinate at a time of a standard normal
vector truncated to the cone ``S_bar z >= 0``; normalising z gives a draw that
is uniform on the cone's intersection with the unit sphere.  The rejection
sampler is slow but exact and is used as the reference distribution.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import (
    AttemptsExhausted,
    DimensionError,
    EmptyInterval,
    InfeasibleInitial,
    InfeasibleState,
)
from .feasibility import NONEMPTY, _hyperplane_draws, chebyshev_check
from .kernels.gibbs import STATUS_OK
from .linalg import null_space_basis, random_orthogonal
from .restrictions import MultiColumnSystem, RestrictionSystem
from .transform import TransformedSystem, pull_back, push_forward, reduce

FEAS_TOL = 1e-8
_SWEEP_TOL = 1e-10
_CHUNK = 8192


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent stream ``key`` under ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def truncated_std_normal(a: float, b: float, u: float) -> float:
    """Inverse-CDF draw from N(0, 1) restricted to (a, b)."""
    if not a < b:
        raise EmptyInterval(f"empty truncation interval ({a}, {b})")
    return float(kernels.truncnorm_draw(float(a), float(b), float(u)))


@dataclass(frozen=True)
class GibbsState:
    z: np.ndarray
    k: int = 0

    @property
    def q_bar(self) -> np.ndarray:
        return self.z / np.linalg.norm(self.z)


@dataclass(frozen=True)
class ChainConfig:
    """Kept draws are sweeps ``burn_in + 1``, then every ``thin``-th after it."""

    draws: int = 1000
    burn_in: int = 3
    thin: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.burn_in < 0 or self.thin < 1 or self.draws < 1:
            raise ValueError("need burn_in >= 0, thin >= 1, draws >= 1")

    @property
    def total_sweeps(self) -> int:
        return self.burn_in + 1 + self.thin * (self.draws - 1)

    def kept_index(self) -> np.ndarray:
        """0-based sweep indices of the kept draws."""
        return self.burn_in + self.thin * np.arange(self.draws)


def _check_feasible(S_bar: np.ndarray, q_bar: np.ndarray, what: str) -> None:
    if S_bar.shape[0] == 0:
        return
    worst = float(np.min(q_bar @ S_bar.T))
    if worst < -FEAS_TOL:
        raise InfeasibleState(f"{what}: min(S_bar q_bar) = {worst:.3g}")


def gibbs_step(ts: TransformedSystem, state: GibbsState, rng: np.random.Generator) -> GibbsState:
    """One full sweep over the coordinates of z."""
    z = np.array(state.z, dtype=float)
    U = rng.random((1, ts.d))
    _, status = kernels.gibbs_sweeps(ts.S_bar, z, U, _SWEEP_TOL)
    if status != STATUS_OK:
        raise InfeasibleState("empty truncation interval during the sweep")
    return GibbsState(z, state.k + 1)


def _run_sweeps(S_bar: np.ndarray, z: np.ndarray, n_sweeps: int, rng: np.random.Generator) -> np.ndarray:
    """States after each of ``n_sweeps`` sweeps (z is advanced in place)."""
    d = z.shape[0]
    out = np.empty((n_sweeps, d))
    done = 0
    while done < n_sweeps:
        m = min(_CHUNK, n_sweeps - done)
        U = rng.random((m, d))
        block, status = kernels.gibbs_sweeps(S_bar, z, U, _SWEEP_TOL)
        if status != STATUS_OK:
            raise InfeasibleState(f"empty truncation interval at sweep {done + len(block) + 1}")
        out[done:done + m] = block
        done += m
    return out


def gibbs_chain(ts: TransformedSystem, q0_bar, cfg: ChainConfig,
                rng: np.random.Generator | None = None, reduced: bool = False) -> np.ndarray:
    """Kept draws as rows; unit vectors in R^n (or R^d with ``reduced=True``)."""
    rng = make_rng(cfg.seed) if rng is None else rng
    z = np.array(q0_bar, dtype=float)
    if z.shape != (ts.d,):
        raise ValueError(f"starting point must have length {ts.d}")
    _check_feasible(ts.S_bar, z / np.linalg.norm(z), "starting point")
    states = _run_sweeps(ts.S_bar, z, cfg.total_sweeps, rng)
    kept = states[cfg.kept_index()]
    q_bar = kept / np.linalg.norm(kept, axis=1, keepdims=True)
    _check_feasible(ts.S_bar, q_bar, "kept draw")
    return q_bar if reduced else pull_back(ts, q_bar)


def parallel_chains(ts: TransformedSystem, q0_bar, cfg: ChainConfig, n_chains: int,
                    threads: int = 1, reduced: bool = False) -> np.ndarray:
    """``n_chains`` independent chains from the same start; shape (n_chains, draws, dim).

    Chain c uses stream ``(cfg.seed, c)``, so results do not depend on ``threads``.
    """
    def one(c: int) -> np.ndarray:
        return gibbs_chain(ts, q0_bar, cfg, make_rng(cfg.seed, c), reduced=reduced)

    if threads <= 1:
        return np.stack([one(c) for c in range(n_chains)])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.stack(list(pool.map(one, range(n_chains))))


@dataclass(frozen=True)
class RejectionResult:
    draws: np.ndarray
    attempts: int

    @property
    def acceptance_rate(self) -> float:
        return self.draws.shape[0] / self.attempts if self.attempts else 0.0


def rejection_sample(system: RestrictionSystem, count: int, rng: np.random.Generator,
                     max_attempts: int = 10_000_000, batch: int = 20_000) -> RejectionResult:
    """``count`` independent uniform draws from the identified set."""
    N = null_space_basis(system.F, system.n)
    accepted: list[np.ndarray] = []
    have = 0
    attempts = 0
    while have < count:
        if attempts >= max_attempts:
            partial = np.vstack(accepted) if accepted else np.zeros((0, system.n))
            raise AttemptsExhausted(partial, attempts)
        m = min(batch, max_attempts - attempts)
        q = _hyperplane_draws(system, N, m, rng)
        ok = np.all(q @ system.S.T >= 0.0, axis=1)
        idx = np.flatnonzero(ok)
        if have + idx.size >= count:
            # stop at the draw that completes the sample
            idx = idx[: count - have]
            attempts += int(idx[-1]) + 1
        else:
            attempts += m
        accepted.append(q[idx])
        have += idx.size
    return RejectionResult(np.vstack(accepted), attempts)


# --- several columns

def _column_system(systems: MultiColumnSystem, Q: np.ndarray, j: int) -> RestrictionSystem:
    """Column j restricted to the orthogonal complement of the other columns."""
    sys_j = systems.columns[j]
    others = np.delete(Q, j, axis=1).T
    return RestrictionSystem(np.vstack([others, sys_j.F]), sys_j.S, column=sys_j.column)


def _check_initial(systems: MultiColumnSystem, Q: np.ndarray) -> None:
    i_star = Q.shape[1]
    if np.max(np.abs(Q.T @ Q - np.eye(i_star))) > FEAS_TOL:
        raise InfeasibleInitial("starting columns are not orthonormal")
    for j in range(i_star):
        if not systems.columns[j].satisfied(Q[:, j], zero_tol=FEAS_TOL, sign_tol=FEAS_TOL):
            raise InfeasibleInitial(f"starting column {j} violates its restrictions")


def gibbs_chain_multi(systems: MultiColumnSystem, Q0, cfg: ChainConfig,
                      rng: np.random.Generator | None = None) -> np.ndarray:
    """Joint draws of the first i* columns; shape (draws, n, i*).

    Each column in turn is updated by one Gibbs sweep over the subsphere
    orthogonal to the other columns and to its own zero restrictions.  Each
    column carries its own radius ``|z_j|`` between sweeps, so the update is
    an exact Gibbs step on (radius, direction).  With a single column this is
    the single-column chain, draw for draw.
    """
    rng = make_rng(cfg.seed) if rng is None else rng
    Q = np.array(Q0, dtype=float)
    if Q.ndim == 1:
        Q = Q[:, None]
    n, i_star = Q.shape
    if i_star > len(systems.columns):
        raise ValueError("more starting columns than restricted columns")
    if i_star >= n - 1:
        raise DimensionError("i* must be below n - 1")
    for j in range(i_star):
        if systems.columns[j].r >= n - i_star:
            raise DimensionError(f"column {j}: r = {systems.columns[j].r} leaves no room to sample")
    _check_initial(systems, Q)
    if i_star == 1:
        ts = reduce(systems.columns[0])
        q0_bar = push_forward(ts, Q[:, 0])
        return gibbs_chain(ts, q0_bar, cfg, rng)[:, :, None]

    radius = np.ones(i_star)
    out = np.empty((cfg.draws, n, i_star))
    keep = set(cfg.kept_index().tolist())
    m = 0
    for k in range(cfg.total_sweeps):
        for j in range(i_star):
            ts = reduce(_column_system(systems, Q, j))
            z = radius[j] * push_forward(ts, Q[:, j])
            _run_sweeps(ts.S_bar, z, 1, rng)
            radius[j] = np.linalg.norm(z)
            q_bar = z / radius[j]
            _check_feasible(ts.S_bar, q_bar, f"column {j}")
            Q[:, j] = pull_back(ts, q_bar)
        if k in keep:
            out[m] = Q
            m += 1
    return out


def rejection_sample_multi(systems: MultiColumnSystem, i_star: int, count: int,
                           rng: np.random.Generator, max_attempts: int = 10_000_000) -> RejectionResult:
    """Uniform draws of the first ``i_star`` columns of a Haar rotation, sign restrictions only."""
    cols = systems.columns[:i_star]
    if any(c.r for c in cols):
        raise ValueError("the multi-column rejection oracle handles sign restrictions only")
    n = systems.n
    accepted = []
    attempts = 0
    while len(accepted) < count:
        if attempts >= max_attempts:
            raise AttemptsExhausted(np.array(accepted).reshape(-1, n, i_star), attempts)
        attempts += 1
        Q = random_orthogonal(n, rng)[:, :i_star]
        ok = True
        for j, c in enumerate(cols):
            if c.S[0] @ Q[:, j] < 0:
                Q[:, j] = -Q[:, j]
            if np.min(c.S @ Q[:, j]) < 0:
                ok = False
                break
        if ok:
            accepted.append(Q)
    return RejectionResult(np.array(accepted), attempts)


SUFFICIENTLY_EMPTY = "SufficientlyEmpty"
SUFFICIENTLY_NONEMPTY = "SufficientlyNonEmpty"
UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class MultiEmptiness:
    status: str
    witness: np.ndarray | None = None  # n x i*

    def completed(self) -> np.ndarray:
        """Witness columns extended to a full orthonormal matrix."""
        W = self.witness
        if W is None:
            raise ValueError("no witness")
        return np.hstack([W, null_space_basis(W.T)])


def multi_column_emptiness(systems: MultiColumnSystem, i_star: int | None = None) -> MultiEmptiness:
    """Sufficient conditions for emptiness or nonemptiness of the joint set.

    Empty if some column's own set is empty.  Nonempty if the Chebyshev
    witnesses, each found orthogonal to the earlier ones, all exist.
    """
    i_star = systems.target + 1 if i_star is None else i_star
    for j in range(i_star):
        try:
            res = chebyshev_check(reduce(systems.columns[j]))
        except DimensionError:
            return MultiEmptiness(UNDETERMINED)
        if not res.nonempty:
            return MultiEmptiness(SUFFICIENTLY_EMPTY)
    witnesses: list[np.ndarray] = []
    for j in range(i_star):
        sys_j = systems.columns[j]
        stacked = sys_j.with_zero_rows(np.array(witnesses)) if witnesses else sys_j
        try:
            res = chebyshev_check(reduce(stacked))
        except DimensionError:
            return MultiEmptiness(UNDETERMINED)
        if res.status != NONEMPTY:
            return MultiEmptiness(UNDETERMINED)
        witnesses.append(res.q0)
    return MultiEmptiness(SUFFICIENTLY_NONEMPTY, np.column_stack(witnesses))


def ks_functional(draws: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Values ``w' q`` for each draw (rows)."""
    return np.asarray(draws) @ np.asarray(w)


def lag1_autocorrelation(x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float) - np.mean(x)
    den = float(x @ x)
    return float(x[1:] @ x[:-1]) / den if den > 0 else 0.0
