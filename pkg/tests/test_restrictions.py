import numpy as np
import pytest
from hypothesis import given, strategies as st

from signzero.errors import (
    MissingInnovations,
    NotCommonSubspace,
    NotPointIdentified,
    RankDeficientF,
    SingularLongRun,
)
from signzero.linalg import random_orthogonal
from signzero.restrictions import (
    ACR_VARIABLES,
    GEQ,
    LEQ,
    MultiColumnSystem,
    RestrictionSpec,
    RestrictionSystem,
    acr19_design,
    apply_ordering_convention,
    elasticity_bound,
    evaluate,
    evaluate_multi,
    extend_zero_common_subspace,
    extend_zero_point_identified,
    narrative_shock_rank_max,
    narrative_shock_sign,
    ordering_permutation,
    point_identified_columns,
    shape,
    sign_a0_entry,
    sign_irf,
    zero_a0_entry,
    zero_impact,
    zero_longrun,
)
from signzero.samplers import ChainConfig, gibbs_chain
from signzero.feasibility import chebyshev_check
from signzero.transform import reduce
from signzero.var import ReducedFormParams, irf_coefficients, structural_view

from helpers import random_params


@pytest.fixture
def acr_params():
    return random_params(6, 2, np.random.default_rng(11))


def test_acr_design_counts(acr_params):
    counts = []
    for H in (None, 5, 11, 23):
        system = evaluate(acr19_design(uhlig_horizon=H), acr_params)
        counts.append((system.r, system.s))
    assert counts == [(2, 4), (2, 27), (2, 51), (2, 99)]


def test_acr_design_with_shock_rank(acr_params):
    u = np.random.default_rng(0).standard_normal((498, 6))
    system = evaluate(acr19_design(uhlig_horizon=5, shock_rank_period=100), acr_params, u)
    assert system.s == 525
    assert sum("narrative" in m for m in system.S_meta) == 498


def test_acr_design_needs_all_variables():
    with pytest.raises(KeyError):
        acr19_design(labels=ACR_VARIABLES[:5] + ("x",))


def test_normalization_is_first_row(rng):
    params = random_params(3, 1, rng)
    system = evaluate([sign_irf(1, 0)], params)
    assert np.allclose(system.S[0], params.sigma_tr_inv()[:, 0])
    assert system.S_meta[0] == "normalization"


def test_leq_rows_are_negated(rng):
    params = random_params(3, 1, rng)
    up = evaluate([sign_irf(2, 1, GEQ)], params).S[1]
    down = evaluate([sign_irf(2, 1, LEQ)], params).S[1]
    assert np.allclose(up, -down)


def test_evaluate_is_idempotent(acr_params):
    specs = acr19_design(uhlig_horizon=5)
    a, b = evaluate(specs, acr_params), evaluate(specs, acr_params)
    assert np.array_equal(a.F, b.F) and np.array_equal(a.S, b.S) and a.S_meta == b.S_meta


def test_zero_rows_match_structural_quantities(rng):
    params = random_params(4, 2, rng)
    Q = random_orthogonal(4, rng)
    q = Q[:, 0]
    view = structural_view(params, Q)
    system = evaluate([zero_a0_entry(2), zero_impact(1), zero_longrun(3)], params)
    a0_row, impact_row, lr_row = system.F
    assert a0_row @ q == pytest.approx(view.A0[0, 2], abs=1e-12)
    assert impact_row @ q == pytest.approx((params.sigma_tr @ Q)[1, 0], abs=1e-12)
    lr = np.linalg.solve(params.long_run_matrix(), params.sigma_tr @ Q)
    assert lr_row @ q == pytest.approx(lr[3, 0], abs=1e-12)


def test_planted_zero_restriction_holds(rng):
    # choose q in the null space of the A0 row, then check A0[0, j] = 0 via the structural map
    params = random_params(4, 1, rng)
    system = evaluate([zero_a0_entry(1)], params)
    N = np.linalg.svd(system.F)[2][1:].T
    q = N @ rng.standard_normal(3)
    q /= np.linalg.norm(q)
    Q = np.linalg.qr(np.column_stack([q, rng.standard_normal((4, 3))]))[0]
    Q[:, 0] *= np.sign(Q[:, 0] @ q)
    assert abs(structural_view(params, Q).A0[0, 1]) < 1e-10


def test_sign_kinds_match_responses(rng):
    params = random_params(3, 2, rng)
    irf = irf_coefficients(params, 6)
    q = rng.standard_normal(3)
    specs = [
        sign_a0_entry(1, LEQ),
        sign_irf(0, 3, cumulative=True),
        elasticity_bound(1, 2, 0.5, horizon=2),
        shape(2, 4, 1),
    ]
    S = evaluate(specs, params, irf=irf).S
    resp = lambda i, h: (irf.C[h][i] @ params.sigma_tr) @ q
    assert S[1] @ q == pytest.approx(-(params.sigma_tr_inv()[:, 1] @ q))
    assert S[2] @ q == pytest.approx(sum(resp(0, h) for h in range(4)))
    assert S[3] @ q == pytest.approx(resp(1, 2) - 0.5 * resp(2, 2))
    assert S[4] @ q == pytest.approx(resp(2, 4) - resp(2, 1))


def test_narrative_sign(rng):
    params = random_params(3, 1, rng)
    u = rng.standard_normal((20, 3))
    row = evaluate([narrative_shock_sign(5, LEQ)], params, u).S[1]
    assert np.allclose(row, -np.linalg.solve(params.sigma_tr, u[5]))
    with pytest.raises(MissingInnovations):
        evaluate([narrative_shock_sign(5)], params)


def test_shock_rank_rows_and_largest_shock(rng):
    params = random_params(3, 1, rng)
    T = 40
    u = rng.standard_normal((T, 3))
    u[7] = 3.0 * params.sigma_tr[:, 0]   # make period 7 a plausible largest shock
    system = evaluate([narrative_shock_rank_max(7)], params, u)
    assert system.s == 1 + T
    cheb = chebyshev_check(reduce(system))
    assert cheb.nonempty
    draws = gibbs_chain(reduce(system), cheb.q0_bar, ChainConfig(draws=200, seed=1))
    eps = np.linalg.solve(params.sigma_tr, u.T).T
    shocks = draws @ eps.T
    assert np.all(shocks[:, 7][:, None] >= shocks - 1e-8)


def test_deduplication_merges_scaled_copies(rng):
    params = random_params(3, 1, rng)
    system = evaluate([sign_irf(0, 0), sign_irf(0, 0), sign_irf(1, 0)], params)
    assert system.s == 3


def test_rank_deficient_zero_rows(rng):
    params = random_params(3, 1, rng)
    with pytest.raises(RankDeficientF):
        evaluate([zero_impact(1), zero_impact(1)], params)


def test_singular_long_run():
    params = ReducedFormParams(np.array([[1.0, 0.0, 0.0], [0.0, 0.5, 0.0]]), np.eye(2), 1)
    with pytest.raises(SingularLongRun):
        evaluate([zero_longrun(0)], params)


def test_spec_validation():
    with pytest.raises(ValueError):
        RestrictionSpec("nope", var=0)
    with pytest.raises(ValueError):
        RestrictionSpec("sign_irf")
    with pytest.raises(ValueError):
        RestrictionSpec("sign_irf", var=0, direction=2)
    with pytest.raises(ValueError):
        zero_a0_entry(1, column=0, row=1)


def test_system_helpers():
    system = RestrictionSystem(np.array([[0.0, 0.0, 1.0]]), np.array([[1.0, 0.0, 0.0]]))
    assert system.satisfied([1.0, 0.0, 0.0])
    assert not system.satisfied([-1.0, 0.0, 0.0])
    assert not system.satisfied([0.6, 0.0, 0.8])
    assert system.with_sign_rows([0.0, 1.0, 0.0]).s == 2
    assert system.with_zero_rows([0.0, 1.0, 0.0]).r == 2


# --- ordering convention (indices are 0-based here)

def test_ordering_examples():
    assert ordering_permutation((0, 2, 1), 0) == (1, 2, 0)
    assert ordering_permutation((2, 2), 1) == (1, 0)
    assert ordering_permutation((3, 2, 0), 0) == (0, 1, 2)


def _dummy_multi(r_counts, target, n=4):
    cols = []
    for j, r in enumerate(r_counts):
        cols.append(RestrictionSystem(np.eye(n)[:r], np.eye(n)[[j]]))
    return MultiColumnSystem(tuple(cols), target=target)


def test_apply_ordering_convention():
    ms = apply_ordering_convention(_dummy_multi((0, 2, 1), 0))
    assert ms.order == (1, 2, 0) and ms.target == 2
    assert ms.r_counts == (2, 1, 0)
    again = apply_ordering_convention(ms)
    assert again.order == ms.order and again.target == ms.target


@given(st.lists(st.integers(0, 4), min_size=1, max_size=6), st.data())
def test_ordering_properties(r_counts, data):
    target = data.draw(st.integers(0, len(r_counts) - 1))
    perm = ordering_permutation(r_counts, target)
    assert sorted(perm) == list(range(len(r_counts)))
    sorted_r = [r_counts[i] for i in perm]
    assert sorted_r == sorted(r_counts, reverse=True)
    tied = [i for i in perm if r_counts[i] == r_counts[target]]
    assert tied[0] == target
    assert ordering_permutation(sorted_r, perm.index(target)) == tuple(range(len(r_counts)))


# --- extended zero restrictions

def test_point_identified_recursive():
    n = 3
    col0 = RestrictionSystem(np.eye(n)[1:], np.eye(n)[[0]])
    col1 = RestrictionSystem(np.zeros((0, n)), np.eye(n)[[1]])
    ms = MultiColumnSystem((col0, col1), target=1)
    Qp = point_identified_columns(ms)
    assert np.allclose(Qp[:, 0], [1.0, 0.0, 0.0])
    ext = extend_zero_point_identified(ms)
    assert ext.r == 1 and np.allclose(ext.F[0], [1.0, 0.0, 0.0])
    assert extend_zero_point_identified(MultiColumnSystem((col0, col1), target=0)) is col0


@pytest.mark.parametrize("seed", range(5))
def test_point_identified_plant_and_recover(seed):
    rng = np.random.default_rng(seed)
    n, i_star = 5, 2
    Q = random_orthogonal(n, rng)
    cols = []
    for i in range(i_star):
        # n - 1 - i rows orthogonal to q_i and (with the earlier q's) pinning it down
        basis = np.linalg.qr(np.column_stack([Q[:, i], rng.standard_normal((n, n - 1))]))[0][:, 1:]
        rows = basis.T[: n - 1 - i]
        if i:
            M = np.vstack([rows, Q[:, :i].T])
            assert np.linalg.matrix_rank(M) == n - 1
        cols.append(RestrictionSystem(rows, Q[:, i][None, :]))
    cols.append(RestrictionSystem(np.zeros((0, n)), rng.standard_normal((1, n))))
    ms = MultiColumnSystem(tuple(cols), target=i_star)
    Qp = point_identified_columns(ms)
    assert np.max(np.abs(Qp - Q[:, :i_star])) < 1e-8


def test_not_point_identified():
    n = 3
    col0 = RestrictionSystem(np.eye(n)[2:], np.eye(n)[[0]])
    ms = MultiColumnSystem((col0, RestrictionSystem(np.zeros((0, n)), np.eye(n)[[1]])), target=1)
    with pytest.raises(NotPointIdentified):
        point_identified_columns(ms)


def test_common_subspace_dimension_count(rng):
    n, i_star = 4, 2
    first = rng.standard_normal((n - i_star, n))
    mix = rng.standard_normal((2, 2)) + 3 * np.eye(2)
    c0 = RestrictionSystem(first, rng.standard_normal((1, n)))
    c1 = RestrictionSystem(mix @ first, rng.standard_normal((1, n)))
    target = RestrictionSystem(rng.standard_normal((1, n)), rng.standard_normal((1, n)))
    ext = extend_zero_common_subspace(MultiColumnSystem((c0, c1, target), target=2))
    assert ext.r == 1 + 2
    # every candidate is orthogonal to the span shared by the first block
    block = np.linalg.svd(first)[2][2:].T
    N = np.linalg.svd(ext.F)[2][ext.r:].T
    assert np.max(np.abs(block.T @ N)) < 1e-10


def test_common_subspace_mismatch(rng):
    n = 4
    c0 = RestrictionSystem(rng.standard_normal((2, n)), rng.standard_normal((1, n)))
    c1 = RestrictionSystem(rng.standard_normal((2, n)), rng.standard_normal((1, n)))
    target = RestrictionSystem(np.zeros((0, n)), rng.standard_normal((1, n)))
    with pytest.raises(NotCommonSubspace):
        extend_zero_common_subspace(MultiColumnSystem((c0, c1, target), target=2))


def test_evaluate_multi_columns(rng):
    params = random_params(3, 1, rng)
    specs = [zero_impact(0, column=1), sign_irf(2, 0, column=1), sign_irf(0, 0, column=0)]
    ms = evaluate_multi(specs, params)
    assert len(ms) == 2 and ms.r_counts == (0, 1)
    assert np.allclose(ms.columns[1].S[0], params.sigma_tr_inv()[:, 1])
