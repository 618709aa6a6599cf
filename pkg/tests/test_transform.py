import numpy as np
import pytest
from hypothesis import given, strategies as st

from signzero.errors import DegenerateRowWarning, DimensionError, NotInHyperplane
from signzero.restrictions import RestrictionSystem
from signzero.transform import pull_back, push_forward, reduce

from helpers import planted_system


def test_no_zero_restrictions_is_identity(rng):
    S = rng.standard_normal((4, 3))
    ts = reduce(RestrictionSystem(np.zeros((0, 3)), S))
    assert np.array_equal(ts.K, np.eye(3)) and np.array_equal(ts.S_bar, S)


def test_hand_projection():
    ts = reduce(RestrictionSystem(np.array([[0.0, 0.0, 1.0]]), np.array([[1.0, 1.0, 1.0]])))
    assert np.linalg.norm(ts.S_bar[0]) == pytest.approx(np.sqrt(2.0))
    # xy-components (1, 1, 0) written in the null basis
    assert np.allclose(ts.basis @ ts.S_bar[0], [1.0, 1.0, 0.0])


def test_basis_vector_round_trip(rng):
    system, _ = planted_system(5, 2, 4, rng)
    ts = reduce(system)
    assert np.allclose(push_forward(ts, ts.K[:, 0]), np.eye(3)[0], atol=1e-12)
    assert np.allclose(pull_back(ts, np.eye(3)[0]), ts.K[:, 0])


def test_push_forward_rejects_off_hyperplane(rng):
    system, _ = planted_system(4, 1, 2, rng)
    ts = reduce(system)
    with pytest.raises(NotInHyperplane):
        push_forward(ts, system.F[0] / np.linalg.norm(system.F[0]))


def test_dimension_guard(rng):
    with pytest.raises(DimensionError):
        reduce(RestrictionSystem(rng.standard_normal((2, 3)), rng.standard_normal((1, 3))))
    ts = reduce(RestrictionSystem(rng.standard_normal((2, 3)), rng.standard_normal((1, 3))), allow_point=True)
    assert ts.d == 1


def test_degenerate_row_is_dropped():
    F = np.array([[0.0, 0.0, 1.0]])
    S = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.warns(DegenerateRowWarning):
        ts = reduce(RestrictionSystem(F, S))
    assert ts.kept_rows == (0,) and ts.dropped_rows == (1,)


def test_sign_patterns_agree_monte_carlo(rng):
    system, _ = planted_system(6, 2, 10, rng)
    ts = reduce(system)
    z = rng.standard_normal((1000, 4))
    q = pull_back(ts, z / np.linalg.norm(z, axis=1, keepdims=True))
    assert np.max(np.abs(q @ system.F.T)) < 1e-10
    assert np.array_equal(q @ system.S.T >= 0, (q @ ts.basis) @ ts.S_bar.T >= 0)


systems = st.integers(3, 8).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(1, n - 2), st.integers(1, 12), st.integers(0, 2**31 - 1)))


@given(systems)
def test_round_trip_property(args):
    n, r, s, seed = args
    rng = np.random.default_rng(seed)
    system, q_star = planted_system(n, r, s, rng)
    ts = reduce(system)
    qb = push_forward(ts, q_star)
    assert abs(np.linalg.norm(qb) - 1.0) < 1e-10
    assert np.max(np.abs(pull_back(ts, qb) - q_star)) < 1e-10
    assert np.all(ts.S_bar @ qb >= -1e-8)
    v = rng.standard_normal(n - r)
    v /= np.linalg.norm(v)
    assert np.max(np.abs(push_forward(ts, pull_back(ts, v)) - v)) < 1e-10
    assert np.linalg.norm(system.F @ pull_back(ts, v)) < 1e-10
