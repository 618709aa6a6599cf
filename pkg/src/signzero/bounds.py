"""Bounds of impulse responses over the identified set, and robust posterior summaries."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import nnls

from . import kernels
from .errors import (
    AllEmpty,
    CombinationBudgetExceeded,
    ConvergenceWarning,
    NoFeasibleCandidate,
)
from .feasibility import active_set_combination_count, chebyshev_check
from .restrictions import RestrictionSystem
from .transform import TransformedSystem, pull_back, push_forward, reduce
from .var import IrfCoefficients, ReducedFormParams, response_weights

ACTIVE_SET = "ActiveSet"
LOCAL_OPT = "LocalOpt"
SAMPLE_ENVELOPE = "SampleEnvelope"
DEFAULT_BUDGET = 1_000_000


@dataclass(frozen=True)
class BoundsQuery:
    var: int
    horizon: int = 0
    cumulative: bool = False


@dataclass(frozen=True)
class BoundsRecord:
    var: int
    shock: int
    horizon: int
    lower: float
    upper: float
    method: str
    arg_lower: np.ndarray | None = None
    arg_upper: np.ndarray | None = None
    converged: bool = True

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _as_queries(query) -> tuple[list[BoundsQuery], bool]:
    if isinstance(query, BoundsQuery):
        return [query], True
    return list(query), False


def _reduced_weights(ts: TransformedSystem, params, irf, queries) -> np.ndarray:
    W = np.array([response_weights(params, irf, q.var, q.horizon, q.cumulative) for q in queries])
    return W @ ts.basis


def _null_directions(S: np.ndarray) -> np.ndarray:
    """Unit vectors satisfying every row with equality (rows of the result)."""
    d = S.shape[1]
    if S.shape[0] == 0:
        return np.eye(d)
    _, sv, vt = np.linalg.svd(S)
    rank = int(np.sum(sv > 1e-10 * max(sv[0], 1.0)))
    return vt[rank:]


def bounds_active_set(system: RestrictionSystem, params: ReducedFormParams, irf: IrfCoefficients,
                      query, budget: int = DEFAULT_BUDGET, ts: TransformedSystem | None = None,
                      tol: float = 1e-10):
    """Exact bounds by trying every set of at most d - 1 binding sign rows.

    Returns one record, or a list when ``query`` is a sequence.
    """
    queries, single = _as_queries(query)
    ts = reduce(system) if ts is None else ts
    S = np.ascontiguousarray(ts.S_unit)
    d = ts.d
    count = active_set_combination_count(S.shape[0], d)
    if count > budget:
        raise CombinationBudgetExceeded(count, budget, "active sets")
    W = np.ascontiguousarray(_reduced_weights(ts, params, irf, queries))
    lower, upper, arg_lo, arg_hi, _ = kernels.active_set_bounds(S, W, tol)
    # directions on which every row binds are feasible but are not found by
    # projecting w when w is orthogonal to them
    for v in _null_directions(S):
        for c in (v, -v):
            vals = W @ c
            better_hi = vals > upper
            better_lo = vals < lower
            upper = np.where(better_hi, vals, upper)
            lower = np.where(better_lo, vals, lower)
            arg_hi[better_hi] = c
            arg_lo[better_lo] = c
    if not np.all(np.isfinite(lower)):
        raise NoFeasibleCandidate("no feasible candidate; the identified set is empty")
    out = [
        BoundsRecord(q.var, system.column, q.horizon, float(lower[k]), float(upper[k]), ACTIVE_SET,
                     pull_back(ts, arg_lo[k]), pull_back(ts, arg_hi[k]))
        for k, q in enumerate(queries)
    ]
    return out[0] if single else out


def _project_to_cone(S: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Nearest point to v in ``{x : S x >= 0}`` (least-distance problem via NNLS)."""
    if S.shape[0] == 0 or np.all(S @ v >= 0):
        return v.copy()
    # min |y| s.t. S y >= -S v, with x = v + y
    h = -S @ v
    d = S.shape[1]
    E = np.vstack([S.T, h[None, :]])
    f = np.zeros(d + 1)
    f[d] = 1.0
    u, _ = nnls(E, f, maxiter=50 * E.shape[1] + 100)
    r = E @ u - f
    if abs(r[d]) < 1e-14:
        return np.zeros_like(v)
    return v - r[:d] / r[d]


def _polish(S: np.ndarray, w: np.ndarray, q: np.ndarray, active_tol: float = 1e-7) -> np.ndarray:
    """Snap to the stationary point of the face whose rows bind at q, if it is feasible and better."""
    act = np.flatnonzero(S @ q <= active_tol)
    best = q
    if act.size == 0:
        cand = w / np.linalg.norm(w)
    else:
        A = S[act]
        _, sv, vt = np.linalg.svd(A)
        rank = int(np.sum(sv > 1e-10 * max(sv[0], 1.0)))
        N = vt[rank:].T
        if N.shape[1] == 0:
            return q
        p = N @ (N.T @ w)
        nrm = np.linalg.norm(p)
        if nrm < 1e-14:
            return q
        cand = p / nrm
    if np.min(S @ cand, initial=0.0) >= -1e-12 and w @ cand >= w @ best:
        best = cand
    return best


def _ascend(S: np.ndarray, w: np.ndarray, q0: np.ndarray, max_iter: int, tol: float):
    """Projected gradient ascent of ``w'q`` on the sphere within the cone.

    Each step moves toward the projection of ``q + grad`` onto the cone, so
    ``q + t (p - q)`` stays in the cone for t in [0, 1]; t is halved until
    the objective does not decrease.  Returns (q, history, converged).
    """
    q = q0 / np.linalg.norm(q0)
    f = float(w @ q)
    history = [f]
    for _ in range(max_iter):
        g = w - (w @ q) * q
        p = _project_to_cone(S, q + g)
        step = p - q
        if np.linalg.norm(step) < 1e-13:
            return _polish(S, w, q), history, True
        t = 1.0
        accepted = False
        while t > 1e-12:
            cand = q + t * step
            nc = np.linalg.norm(cand)
            if nc > 1e-12:
                cand /= nc
                fc = float(w @ cand)
                if fc >= f:
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            return _polish(S, w, q), history, True
        gain = fc - f
        q, f = cand, fc
        history.append(f)
        if gain < tol:
            return _polish(S, w, q), history, True
    return _polish(S, w, q), history, False


@dataclass(frozen=True)
class LocalOptTrace:
    """Objective values along the ascent, per direction (for diagnostics)."""

    upper: tuple[float, ...]
    lower: tuple[float, ...]


def bounds_local_opt(system: RestrictionSystem, params: ReducedFormParams, irf: IrfCoefficients,
                     query, q_init=None, ts: TransformedSystem | None = None,
                     extra_starts: Iterable[np.ndarray] = (), sample: np.ndarray | None = None,
                     sample_starts: int = 3, max_iter: int = 500, tol: float = 1e-9,
                     return_trace: bool = False):
    """Local bounds by ascent on the reduced sphere from ``q_init`` (default: the Chebyshev witness).

    Ascent from a start where the objective is already positive reaches the
    global maximum, since the superlevel sets above zero are convex.  From a
    start with a nonpositive objective it can stop at a worse extreme ray,
    so further starts help: ``extra_starts`` (unit vectors in R^n) are used for every query,
    and the ``sample_starts`` best rows of ``sample`` (feasible draws in R^n)
    for each query and direction, which makes the result at least as wide
    as the sample envelope.
    """
    queries, single = _as_queries(query)
    ts = reduce(system) if ts is None else ts
    S = ts.S_unit
    if q_init is None:
        cheb = chebyshev_check(ts)
        if not cheb.nonempty:
            raise NoFeasibleCandidate("the identified set is empty")
        starts = [cheb.q0_bar]
    else:
        starts = [push_forward(ts, q_init)]
    starts += [push_forward(ts, q) for q in extra_starts]
    W = _reduced_weights(ts, params, irf, queries)
    sample_bar = None if sample is None else np.asarray(sample, dtype=float) @ ts.basis
    out = []
    traces = []
    for k, qy in enumerate(queries):
        w = W[k]
        scale = np.linalg.norm(w)
        if scale < 1e-300:
            q = pull_back(ts, starts[0])
            out.append(BoundsRecord(qy.var, system.column, qy.horizon, 0.0, 0.0, LOCAL_OPT, q, q))
            traces.append(LocalOptTrace((0.0,), (0.0,)))
            continue
        w_hat = w / scale
        best = {}
        hist = {}
        ok = True
        for sign in (1.0, -1.0):
            top = None
            own = list(starts)
            if sample_bar is not None and sample_bar.shape[0]:
                vals = sample_bar @ (sign * w_hat)
                m = min(sample_starts, vals.shape[0])
                pick = np.argpartition(-vals, m - 1)[:m]
                own += [sample_bar[i] for i in pick[np.argsort(-vals[pick], kind="stable")]]
            for q0 in own:
                q, h, conv = _ascend(S, sign * w_hat, q0, max_iter, tol)
                ok = ok and conv
                val = float(sign * w_hat @ q)
                if top is None or val > top[0]:
                    top = (val, q, h)
            best[sign] = top[1]
            hist[sign] = tuple(scale * sign * v for v in top[2])
        if not ok:
            warnings.warn(f"local bounds for variable {qy.var}, horizon {qy.horizon} hit "
                          f"{max_iter} iterations", ConvergenceWarning, stacklevel=2)
        hi, lo = best[1.0], best[-1.0]
        out.append(BoundsRecord(qy.var, system.column, qy.horizon, float(w @ lo), float(w @ hi),
                                LOCAL_OPT, pull_back(ts, lo), pull_back(ts, hi), converged=ok))
        traces.append(LocalOptTrace(hist[1.0], hist[-1.0]))
    result = out[0] if single else out
    if return_trace:
        return result, (traces[0] if single else traces)
    return result


def bounds_sample_envelope(draws: np.ndarray, params: ReducedFormParams, irf: IrfCoefficients,
                           query, shock: int = 0):
    """Range of the response over a set of feasible draws (rows, in R^n)."""
    queries, single = _as_queries(query)
    draws = np.asarray(draws, dtype=float)
    out = []
    for qy in queries:
        vals = draws @ response_weights(params, irf, qy.var, qy.horizon, qy.cumulative)
        i_lo, i_hi = int(np.argmin(vals)), int(np.argmax(vals))
        out.append(BoundsRecord(qy.var, shock, qy.horizon, float(vals[i_lo]), float(vals[i_hi]),
                                SAMPLE_ENVELOPE, draws[i_lo], draws[i_hi]))
    return out[0] if single else out


def choose_method(s: int, d: int, budget: int = DEFAULT_BUDGET) -> str:
    return ACTIVE_SET if active_set_combination_count(s, d) <= budget else LOCAL_OPT


def compute_bounds(system: RestrictionSystem, params: ReducedFormParams, irf: IrfCoefficients,
                   queries: Sequence[BoundsQuery], method: str = "auto", budget: int = DEFAULT_BUDGET,
                   ts: TransformedSystem | None = None, q_init=None) -> list[BoundsRecord]:
    """Bounds for each query with the requested (or automatically chosen) method."""
    ts = reduce(system) if ts is None else ts
    if method == "auto":
        method = choose_method(ts.s, ts.d, budget)
    if method == ACTIVE_SET:
        return bounds_active_set(system, params, irf, list(queries), budget=budget, ts=ts)
    if method == LOCAL_OPT:
        return bounds_local_opt(system, params, irf, list(queries), q_init=q_init, ts=ts)
    raise ValueError(f"unknown bounds method {method!r}")


# --- robust summaries over posterior draws

@dataclass(frozen=True)
class RobustSummary:
    n_draws: int
    n_nonempty: int
    prob_empty: float
    posterior_means: tuple[float, float]
    credible_region: tuple[float, float]
    alpha: float
    lower_probability: float | None = None


def _interval(rec) -> tuple[float, float] | None:
    if rec is None:
        return None
    if isinstance(rec, BoundsRecord):
        return rec.lower, rec.upper
    lo, hi = rec
    if lo is None or hi is None or np.isnan(lo) or np.isnan(hi):
        return None
    return float(lo), float(hi)


def shortest_robust_region(lower: np.ndarray, upper: np.ndarray, alpha: float) -> tuple[float, float]:
    """Shortest [a, b] containing at least a fraction ``alpha`` of the intervals [l, u].

    Left endpoints are scanned over the observed lower bounds; for each a the
    best b is the k-th smallest upper bound among intervals with l >= a,
    k = ceil(alpha N).  Ties go to the smaller a.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    N = lower.shape[0]
    k = max(1, math.ceil(alpha * N - 1e-9))
    best = None
    for a in np.unique(lower):
        u = upper[lower >= a]
        if u.shape[0] < k:
            break
        b = float(np.partition(u, k - 1)[k - 1])
        if best is None or b - a < best[1] - best[0]:
            best = (float(a), b)
    return best


EVENTS: dict[str, Callable[[float, float], bool]] = {
    "negative": lambda l, u: u < 0,
    "positive": lambda l, u: l > 0,
    "nonpositive": lambda l, u: u <= 0,
    "nonnegative": lambda l, u: l >= 0,
}


def robust_summary(records: Sequence, alpha: float = 0.68,
                   event: Callable[[float, float], bool] | str | None = None) -> RobustSummary:
    """Summaries over posterior draws; ``None`` entries (or NaN pairs) mark empty sets.

    ``event(l, u)`` must say whether the event holds at every point of [l, u];
    its lower probability is the fraction of nonempty draws where it does.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    ivs = [_interval(r) for r in records]
    kept = [iv for iv in ivs if iv is not None]
    if not ivs:
        raise AllEmpty("no draws")
    if not kept:
        raise AllEmpty(f"all {len(ivs)} draws have an empty identified set")
    arr = np.array(kept)
    lo, hi = arr[:, 0], arr[:, 1]
    region = shortest_robust_region(lo, hi, alpha)
    lp = None
    if event is not None:
        pred = EVENTS[event] if isinstance(event, str) else event
        lp = float(np.mean([bool(pred(a, b)) for a, b in kept]))
    return RobustSummary(
        n_draws=len(ivs),
        n_nonempty=len(kept),
        prob_empty=1.0 - len(kept) / len(ivs),
        posterior_means=(float(lo.mean()), float(hi.mean())),
        credible_region=region,
        alpha=alpha,
        lower_probability=lp,
    )
