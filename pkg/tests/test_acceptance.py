"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line."""
import math
import time
from pathlib import Path

import numpy as np
import pytest
import yaml
from scipy import stats

from signzero.bounds import BoundsQuery, bounds_active_set, bounds_local_opt, bounds_sample_envelope
from signzero.cli.config import load_config
from signzero.cli.main import main, synthetic_dataset
from signzero.cli.pipeline import run_pipeline
from signzero.errors import CombinationBudgetExceeded
from signzero.feasibility import EMPTY, NONEMPTY, chebyshev_check, vertex_emptiness_check
from signzero.linalg import null_space_basis
from signzero.restrictions import MultiColumnSystem, RestrictionSystem, acr19_design, evaluate
from signzero.samplers import (
    ChainConfig,
    gibbs_chain,
    gibbs_chain_multi,
    lag1_autocorrelation,
    make_rng,
    multi_column_emptiness,
    parallel_chains,
    rejection_sample,
    rejection_sample_multi,
)
from signzero.transform import pull_back, push_forward, reduce
from signzero.var import VarData, irf_coefficients, ols_estimate, response_weights

from helpers import empty_system, planted_system, random_params

ROOT = Path(__file__).resolve().parents[1]
SMALL_CONFIG = ROOT / "configs" / "small.yaml"


def criterion(number):
    @pytest.fixture
    def fixture(record_property):
        record_property("criterion", number)
        return lambda detail: record_property("detail", detail)
    return fixture


c1, c2, c3, c4, c5, c6, c7, c8, c9, c10 = (criterion(k) for k in range(1, 11))


# 1 --------------------------------------------------------------------------

def test_c01_change_of_basis_round_trip(c1):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    disagreements = 0
    feasibility_changes = 0
    worst_inverse = 0.0
    for _ in range(200):
        n = int(rng.integers(3, 9))
        r = int(rng.integers(1, n - 1))
        s = int(rng.integers(1, 13))
        system, q_star = planted_system(n, r, s, rng)
        ts = reduce(system)
        N = null_space_basis(system.F)
        z = rng.standard_normal((50, N.shape[1])) @ N.T
        qs = np.vstack([q_star, z / np.linalg.norm(z, axis=1, keepdims=True)])
        for q in qs:
            qb = push_forward(ts, q)
            full, red = system.S @ q, ts.S_bar @ qb
            clear = np.abs(full) > 1e-8
            disagreements += int(np.sum((full[clear] > 0) != (red[clear] > 0)))
            feasibility_changes += int(bool(np.all(full >= -1e-8)) != bool(np.all(red >= -1e-8)))
            worst_inverse = max(worst_inverse, np.max(np.abs(pull_back(ts, qb) - q)))
            v = rng.standard_normal(n - r)
            v /= np.linalg.norm(v)
            worst_inverse = max(worst_inverse, np.max(np.abs(push_forward(ts, pull_back(ts, v)) - v)))
    elapsed = time.perf_counter() - t0
    c1(f"sign disagreements {disagreements}, feasibility changes {feasibility_changes}, "
       f"max inverse error {worst_inverse:.1e}, {elapsed:.2f} s")
    assert disagreements == 0 and feasibility_changes == 0
    assert worst_inverse < 1e-10
    assert elapsed < 10


# 2 --------------------------------------------------------------------------

def sphere_search(system, m, rng):
    """Independent oracle: uniform points on the unit sphere of null(F), any feasible?"""
    n = system.n
    if system.r:
        P = np.eye(n) - system.F.T @ np.linalg.solve(system.F @ system.F.T, system.F)
    else:
        P = np.eye(n)
    x = rng.standard_normal((m, n)) @ P
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return bool(np.any(np.all(x @ system.S.T >= 0, axis=1)))


def test_c02_emptiness_oracles_agree(c2):
    rng = np.random.default_rng(77)
    t0 = time.perf_counter()
    agree = 0
    kinds = {"interior": 0, "empty": 0}
    for k in range(100):
        n = int(rng.integers(3, 7))
        r = int(rng.integers(0, n - 1))
        if k % 2 == 0:
            system, _ = planted_system(n, r, int(rng.integers(1, 11)), rng, margin=0.25)
            expected = NONEMPTY
        else:
            system = empty_system(n, r, n - r + int(rng.integers(1, 6)), rng)
            expected = EMPTY
        ts = reduce(system)
        cheb = chebyshev_check(ts)
        if expected == NONEMPTY:
            assert cheb.radius > 1e-6
        vert = vertex_emptiness_check(ts).status
        sampled = NONEMPTY if sphere_search(system, 100_000, rng) else EMPTY
        kinds["interior" if expected == NONEMPTY else "empty"] += 1
        agree += int(cheb.status == vert == sampled == expected)
    elapsed = time.perf_counter() - t0
    c2(f"{agree}/100 agree ({kinds['interior']} interior, {kinds['empty']} constructed empty), {elapsed:.1f} s")
    assert agree == 100
    assert elapsed < 60


# 3 --------------------------------------------------------------------------

def test_c03_few_restrictions_never_empty(c3):
    rng = np.random.default_rng(5)
    nonempty = 0
    for _ in range(100):
        n = int(rng.integers(3, 9))
        r = int(rng.integers(0, n - 1))
        s = int(rng.integers(1, n - r + 1))
        system = RestrictionSystem(rng.standard_normal((r, n)), rng.standard_normal((s, n)))
        nonempty += int(chebyshev_check(reduce(system)).status == NONEMPTY)
    c3(f"{nonempty}/100 NonEmpty with r + s <= n")
    assert nonempty == 100


# 4 --------------------------------------------------------------------------

def test_c04_restriction_counts(c4):
    names, Y = synthetic_dataset("acr", 500, 5)
    data = VarData(Y, 2, labels=names)
    params = ols_estimate(data)
    u = params.innovations(data)
    assert u.shape[0] == 498
    counts = [evaluate(acr19_design(uhlig_horizon=H), params).s for H in (None, 5, 11, 23)]
    rank = evaluate(acr19_design(uhlig_horizon=5, shock_rank_period=250), params, u)
    ts = reduce(rank)
    with pytest.raises(CombinationBudgetExceeded) as vert:
        vertex_emptiness_check(ts)
    with pytest.raises(CombinationBudgetExceeded) as act:
        bounds_active_set(rank, params, irf_coefficients(params, 0), BoundsQuery(1, 0))
    c4(f"s = {counts}, shock-rank s = {rank.s} (d = {ts.d}), "
       f"guard counts {vert.value.count:,} / {act.value.count:,}")
    assert counts == [4, 27, 51, 99]
    assert rank.s == 525 and ts.s == 525 and rank.r == 2 and ts.d == 4
    assert vert.value.count == 23_979_550
    assert act.value.count == 24_117_626


# 5 --------------------------------------------------------------------------

def sampler_instances():
    rng = np.random.default_rng(314)
    out = []
    for k in range(5):
        n = int(rng.integers(3, 7))
        r = int(rng.integers(0, n - 1))
        system, _ = planted_system(n, r, int(rng.integers(2, 7)), rng, margin=0.3)
        params = random_params(n, 2, rng)
        w = response_weights(params, irf_coefficients(params, 2), k % n, 2)
        out.append((system, w))
    return out


def test_c05_gibbs_matches_rejection(c5):
    t0 = time.perf_counter()
    passes = []
    for idx, (system, w) in enumerate(sampler_instances()):
        ts = reduce(system)
        q0 = chebyshev_check(ts).q0_bar
        ok = 0
        for seed in range(10):
            gib = gibbs_chain(ts, q0, ChainConfig(draws=10_000, burn_in=3, thin=2, seed=seed))
            rej = rejection_sample(system, 10_000, make_rng(seed, 10_000 + idx)).draws
            ok += int(stats.ks_2samp(gib @ w, rej @ w).pvalue >= 0.01)
        passes.append(ok)
    elapsed = time.perf_counter() - t0
    c5(f"seeds not rejected at 1% per system: {passes}, {elapsed:.1f} s")
    assert all(p >= 9 for p in passes)
    assert elapsed < 300


# 6 --------------------------------------------------------------------------

def test_c06_burn_in_and_thinning(c6):
    acfs, pvals = [], []
    for idx, (system, w) in enumerate(sampler_instances()):
        ts = reduce(system)
        q0 = chebyshev_check(ts).q0_bar
        draws = gibbs_chain(ts, q0, ChainConfig(draws=20_000, burn_in=3, thin=2, seed=idx))
        acfs.append(lag1_autocorrelation(draws @ w))
        fourth = parallel_chains(ts, q0, ChainConfig(draws=1, burn_in=3, thin=2, seed=500 + idx), 4000)[:, 0]
        rej = rejection_sample(system, 4000, make_rng(600 + idx)).draws
        pvals.append(stats.ks_2samp(fourth @ w, rej @ w).pvalue)
    c6(f"lag-1 autocorrelation {np.round(acfs, 3).tolist()}, fourth-draw KS p {np.round(pvals, 3).tolist()}")
    assert all(abs(a) < 0.05 for a in acfs)
    assert all(p >= 0.01 for p in pvals)


# 7 --------------------------------------------------------------------------

def test_c07_bounds_cross_validation(c7):
    rng = np.random.default_rng(99)
    worst_gap = 0.0
    envelope_violations = 0
    shrink_violations = 0
    checks = 0
    for k in range(20):
        n = int(rng.integers(3, 7))
        r = int(rng.integers(max(0, n - 4), n - 1))
        s = int(rng.integers(2, 9))
        system, q_star = planted_system(n, r, s, rng, margin=0.2)
        params = random_params(n, 2, rng)
        irf = irf_coefficients(params, 4)
        queries = [BoundsQuery(i, h) for i in range(n) for h in (0, 2, 4)]
        ts = reduce(system)
        assert ts.d <= 4 and ts.s <= 8
        sample = gibbs_chain(ts, chebyshev_check(ts).q0_bar, ChainConfig(draws=100_000, seed=k))
        exact = bounds_active_set(system, params, irf, queries, ts=ts)
        local = bounds_local_opt(system, params, irf, queries, ts=ts, sample=sample)
        env = bounds_sample_envelope(sample, params, irf, queries)
        for a, b, e in zip(exact, local, env):
            worst_gap = max(worst_gap, abs(a.lower - b.lower), abs(a.upper - b.upper))
            envelope_violations += int(a.lower > e.lower or a.upper < e.upper)
            envelope_violations += int(b.lower > e.lower or b.upper < e.upper)
        # nested designs: adding sign rows satisfied by q* never widens the bounds
        nested = system
        prev = exact
        for _ in range(3):
            row = rng.standard_normal(n)
            nested = nested.with_sign_rows(row if row @ q_star >= 0 else -row)
            cur = bounds_active_set(nested, params, irf, queries)
            for p, c in zip(prev, cur):
                checks += 1
                shrink_violations += int(c.lower < p.lower or c.upper > p.upper)
            prev = cur
    c7(f"max |active set - local| {worst_gap:.1e}, envelope violations {envelope_violations}, "
       f"shrinkage violations {shrink_violations}/{checks}")
    assert worst_gap < 1e-5
    assert envelope_violations == 0
    assert shrink_violations == 0


# 8 --------------------------------------------------------------------------

def sign_only(S):
    S = np.asarray(S, dtype=float)
    return RestrictionSystem(np.zeros((0, S.shape[1])), S)


def test_c08_multi_column(c8):
    rng = np.random.default_rng(8)
    # single column: identical to the single-column chain
    system, q = planted_system(5, 1, 4, rng)
    cfg = ChainConfig(draws=2000, seed=3)
    ts = reduce(system)
    single = gibbs_chain(ts, push_forward(ts, q), cfg)
    multi = gibbs_chain_multi(MultiColumnSystem((system,)), q, cfg)[:, :, 0]
    identical = np.array_equal(single, multi)

    n = 4
    cols = (sign_only([[1.0, 0, 0, 0], [0.3, 1.0, 0, 0]]), sign_only([[0, 1.0, 0, 0], [0, 0.5, 1.0, 0.2]]))
    ms = MultiColumnSystem(cols, target=1)
    start = multi_column_emptiness(ms)
    draws = gibbs_chain_multi(ms, start.witness, ChainConfig(draws=10_000, seed=4))
    gram = np.einsum("kij,kil->kjl", draws, draws)
    ortho = float(np.max(np.abs(gram - np.eye(2))))
    oracle = rejection_sample_multi(ms, 2, 10_000, make_rng(4, 1)).draws
    w = np.array([0.4, -0.3, 0.8, 0.5])
    p1 = stats.ks_2samp(draws[:, :, 0] @ w, oracle[:, :, 0] @ w).pvalue
    p2 = stats.ks_2samp(draws[:, :, 1] @ w, oracle[:, :, 1] @ w).pvalue
    c8(f"single column bitwise identical {identical}, orthogonality error {ortho:.1e}, "
       f"KS p-values {p1:.3f} / {p2:.3f}")
    assert identical
    assert ortho < 1e-8
    assert p1 >= 0.01 and p2 >= 0.01


# 9 --------------------------------------------------------------------------

def test_c09_end_to_end_determinism(c9, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(SMALL_CONFIG), "--out", str(a)]) == 0
    assert main(["run", str(SMALL_CONFIG), "--out", str(b)]) == 0
    files = sorted(p.name for p in a.iterdir())
    same = [name for name in files if (a / name).read_bytes() == (b / name).read_bytes()]
    c9(f"{len(same)}/{len(files)} output files byte-identical")
    assert files == sorted(p.name for p in b.iterdir())
    assert len(same) == len(files)


# 10 -------------------------------------------------------------------------

def test_c10_nested_designs_prob_empty(c10, tmp_path):
    raw = yaml.safe_load(SMALL_CONFIG.read_text())
    raw["posterior"]["draws"] = 500
    raw["data"]["path"] = str((SMALL_CONFIG.parent / raw["data"]["path"]).resolve())
    path = tmp_path / "c10.yaml"
    path.write_text(yaml.safe_dump(raw))
    out = run_pipeline(load_config(path, out_dir=tmp_path / "out"), mode="check")
    probs = [s.prob_empty for s in out.summaries]
    c10("prob_empty over 500 draws: " + ", ".join(f"{s.name} {s.prob_empty:.3f}" for s in out.summaries))
    assert all(s.n_draws == 500 for s in out.summaries)
    assert all(b >= a for a, b in zip(probs, probs[1:]))
