"""Posterior loop: per reduced-form draw, emptiness check, Gibbs draws and bounds for every design."""
from __future__ import annotations

import time
import warnings
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..bounds import (
    ACTIVE_SET,
    LOCAL_OPT,
    BoundsQuery,
    RobustSummary,
    bounds_active_set,
    bounds_local_opt,
    choose_method,
    robust_summary,
)
from ..errors import AllEmpty, CombinationBudgetExceeded, ConfigError, DegenerateRowWarning, DimensionError
from ..feasibility import chebyshev_check, rejection_emptiness_check, vertex_emptiness_check
from ..restrictions import evaluate
from ..samplers import ChainConfig, gibbs_chain, make_rng
from ..transform import reduce
from ..var import NiwPosterior, irf_coefficients, label_index, posterior_draw_niw, response_weights
from .config import RunConfig

EMPTY = "Empty"
NONEMPTY = "NonEmpty"
SHARED = "*"


@dataclass(frozen=True)
class ResponseRecord:
    variable: str
    horizon: int
    lower: float | None
    upper: float | None
    method: str | None
    sample_mean: float | None


@dataclass(frozen=True)
class DrawRecord:
    design: str
    draw: int
    stream: str
    status: str
    radius: float
    responses: tuple[ResponseRecord, ...] = ()


@dataclass
class Timings:
    """Seconds and call counts keyed by (design, algorithm)."""

    seconds: dict = field(default_factory=lambda: defaultdict(float))
    calls: dict = field(default_factory=lambda: defaultdict(int))

    def add(self, design: str, algo: str, dt: float) -> None:
        self.seconds[(design, algo)] += dt
        self.calls[(design, algo)] += 1

    def merge(self, other: "Timings") -> None:
        for k, v in other.seconds.items():
            self.seconds[k] += v
        for k, v in other.calls.items():
            self.calls[k] += v


@dataclass(frozen=True)
class DesignSummary:
    name: str
    n_draws: int
    n_nonempty: int
    prob_empty: float
    responses: dict  # variable -> list of (horizon, RobustSummary | None)


@dataclass
class RunOutput:
    config: RunConfig
    records: list[DrawRecord]
    summaries: list[DesignSummary]
    timings: Timings
    mode: str = "run"
    bench: list = field(default_factory=list)

    @property
    def all_empty(self) -> bool:
        return all(s.n_nonempty == 0 for s in self.summaries)


class _Clock:
    def __init__(self, timings: Timings, design: str, algo: str):
        self.timings, self.design, self.algo = timings, design, algo

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.timings.add(self.design, self.algo, time.perf_counter() - self.t0)
        return False


def _max_horizon(cfg: RunConfig) -> int:
    h = max(cfg.horizons) if cfg.bounds_enabled else 0
    for d in cfg.designs:
        for s in d.specs:
            h = max(h, s.horizon, s.horizon2)
    return h


def _needs_innovations(cfg: RunConfig) -> bool:
    return any(s.kind.startswith("narrative") for d in cfg.designs for s in d.specs)


def _draw_worker(cfg: RunConfig, post: NiwPosterior, d: int, mode: str):
    timings = Timings()
    bench_rows = []
    with _Clock(timings, SHARED, "posterior_draw"):
        params = posterior_draw_niw(cfg.data, make_rng(cfg.seed, d), require_stable=cfg.stable_only,
                                    posterior=post)
        irf = irf_coefficients(params, _max_horizon(cfg))
    u = params.innovations(cfg.data) if _needs_innovations(cfg) else None
    var_idx = [label_index(cfg.variables, v) for v in cfg.bounds_variables]
    queries = [BoundsQuery(i, h, cfg.cumulative) for i in var_idx for h in cfg.horizons]
    out = []
    for k, design in enumerate(cfg.designs):
        name = design.name
        stream = f"{cfg.seed}:{d}:{k + 1}"
        with _Clock(timings, name, "restrictions"):
            system = evaluate(design.specs, params, u, column=0, irf=irf)
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", DegenerateRowWarning)
                    ts = reduce(system)
            except DimensionError as exc:
                raise ConfigError(f"design {name!r}: {exc}") from None
        with _Clock(timings, name, "chebyshev"):
            cheb = chebyshev_check(ts)
        if mode == "bench":
            bench_rows += _bench_emptiness(cfg, system, ts, cheb, name, d, k, timings)
        if not cheb.nonempty:
            out.append(DrawRecord(name, d, stream, EMPTY, float(cheb.radius)))
            continue
        if mode == "check":
            out.append(DrawRecord(name, d, stream, NONEMPTY, float(cheb.radius)))
            continue
        sample = None
        if cfg.sampler_enabled:
            chain = ChainConfig(cfg.sampler_draws, cfg.burn_in, cfg.thin, cfg.seed)
            with _Clock(timings, name, "gibbs"):
                sample = gibbs_chain(ts, cheb.q0_bar, chain, make_rng(cfg.seed, d, k + 1))
        records = {}
        if cfg.bounds_enabled:
            method = cfg.bounds_method
            if method == "auto":
                method = choose_method(ts.s, ts.d, cfg.budget)
            with _Clock(timings, name, f"bounds_{method}"):
                if method == ACTIVE_SET:
                    recs = bounds_active_set(system, params, irf, queries, budget=cfg.budget, ts=ts)
                else:
                    recs = bounds_local_opt(system, params, irf, queries, ts=ts, sample=sample)
            records = {(r.var, r.horizon): r for r in recs}
            if mode == "bench":
                bench_rows += _bench_bounds(cfg, system, params, irf, queries, ts, recs, method, name, d, timings,
                                              sample)
        responses = []
        for q in queries:
            rec = records.get((q.var, q.horizon))
            mean = None
            if sample is not None:
                mean = float(np.mean(sample @ response_weights(params, irf, q.var, q.horizon, q.cumulative)))
            responses.append(ResponseRecord(
                cfg.variables[q.var], q.horizon,
                None if rec is None else rec.lower, None if rec is None else rec.upper,
                None if rec is None else rec.method, mean))
        out.append(DrawRecord(name, d, stream, NONEMPTY, float(cheb.radius), tuple(responses)))
    return out, timings, bench_rows


def _bench_emptiness(cfg, system, ts, cheb, name, d, k, timings):
    rows = []
    t0 = time.perf_counter()
    try:
        vert = vertex_emptiness_check(ts, budget=cfg.budget)
        status = vert.status
    except CombinationBudgetExceeded as exc:
        status = f"skipped ({exc.count} subsets)"
    timings.add(name, "vertex", time.perf_counter() - t0)
    rows.append((name, d, "vertex", status, cheb.status))
    t0 = time.perf_counter()
    rej = rejection_emptiness_check(system, make_rng(cfg.seed, d, 1000 + k))
    timings.add(name, "rejection", time.perf_counter() - t0)
    rows.append((name, d, "rejection", "Empty" if rej.status == "PresumedEmpty" else rej.status, cheb.status))
    return rows


def _bench_bounds(cfg, system, params, irf, queries, ts, recs, method, name, d, timings, sample):
    other = LOCAL_OPT if method == ACTIVE_SET else ACTIVE_SET
    t0 = time.perf_counter()
    try:
        if other == ACTIVE_SET:
            alt = bounds_active_set(system, params, irf, queries, budget=cfg.budget, ts=ts)
        else:
            alt = bounds_local_opt(system, params, irf, queries, ts=ts, sample=sample)
    except CombinationBudgetExceeded as exc:
        timings.add(name, f"bounds_{other}", time.perf_counter() - t0)
        return [(name, d, f"bounds_{other}", f"skipped ({exc.count} subsets)", "")]
    timings.add(name, f"bounds_{other}", time.perf_counter() - t0)
    gap = max(max(abs(a.lower - b.lower), abs(a.upper - b.upper)) for a, b in zip(recs, alt))
    return [(name, d, f"bounds_{other}", f"max gap {gap:.3g}", method)]


def _summarise(cfg: RunConfig, records: list[DrawRecord]) -> list[DesignSummary]:
    out = []
    for design in cfg.designs:
        recs = [r for r in records if r.design == design.name]
        n_ne = sum(r.status == NONEMPTY for r in recs)
        responses = {}
        if cfg.bounds_enabled:
            for v in cfg.bounds_variables:
                rows = []
                for h in cfg.horizons:
                    ivs = []
                    for r in recs:
                        if r.status != NONEMPTY or not r.responses:
                            ivs.append(None)
                            continue
                        hit = next(x for x in r.responses if x.variable.lower() == v.lower() and x.horizon == h)
                        ivs.append((hit.lower, hit.upper))
                    try:
                        summ = robust_summary(ivs, cfg.alpha, cfg.event)
                    except AllEmpty:
                        summ = None
                    rows.append((h, summ))
                responses[v] = rows
        out.append(DesignSummary(design.name, len(recs), n_ne, 1.0 - n_ne / len(recs) if recs else 1.0, responses))
    return out


def _enabled_algorithms(cfg: RunConfig, mode: str) -> list[tuple[str, str]]:
    out = [(SHARED, "posterior_draw")]
    for d in cfg.designs:
        out += [(d.name, "restrictions"), (d.name, "chebyshev")]
        if mode == "bench":
            out += [(d.name, "vertex"), (d.name, "rejection")]
        if mode == "check":
            continue
        if cfg.sampler_enabled:
            out.append((d.name, "gibbs"))
        if cfg.bounds_enabled and cfg.bounds_method != "auto":
            out.append((d.name, f"bounds_{cfg.bounds_method}"))
    return out


def run_pipeline(cfg: RunConfig, mode: str = "run") -> RunOutput:
    """Run every design over ``cfg.posterior_draws`` reduced-form draws.

    Reduced-form draw d uses stream ``(seed, d)`` and is shared by all
    designs; the Gibbs chain of design k on draw d uses ``(seed, d, k + 1)``.
    Records are ordered by draw, then design, whatever the thread count.
    """
    if mode not in ("run", "check", "bench"):
        raise ValueError(f"unknown mode {mode!r}")
    if cfg.data is None:
        raise ConfigError("configuration was loaded without data")
    post = NiwPosterior.from_data(cfg.data)
    timings = Timings()

    def work(d):
        return _draw_worker(cfg, post, d, mode)

    draws = range(cfg.posterior_draws)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(work, draws))
    else:
        results = [work(d) for d in draws]
    records, bench = [], []
    for recs, t, b in results:
        records += recs
        timings.merge(t)
        bench += b
    for name, algo in _enabled_algorithms(cfg, mode):
        # a row per enabled algorithm even if no draw reached it
        timings.seconds[(name, algo)] += 0.0
        timings.calls[(name, algo)] += 0
    return RunOutput(cfg, records, _summarise(cfg, records), timings, mode, bench)
