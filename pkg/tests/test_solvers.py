import numpy as np
import pytest

from conftest import spikes
from scadenoise.solvers import (
    FEAS_TOL,
    CapacityExceededError,
    Sl0Params,
    SolverError,
    least_squares_known_support,
    sl0_solve,
    sl0_solve_batch,
    threshold_to_sparse,
)

PLAIN = Sl0Params(normalize_columns=False, refine=False)


def residual(H, z, x):
    return np.linalg.norm(H @ z - x) / (1 + np.linalg.norm(x))


def rel_err(z, z_true):
    return np.linalg.norm(z - z_true) / np.linalg.norm(z_true)


# ---- parameters ----------------------------------------------------------


@pytest.mark.parametrize(
    "kw",
    [{"sigma_decrease": 1.0}, {"sigma_decrease": 0.0}, {"sigma_min": 0.0}, {"mu": -1.0}, {"inner_iterations": 0}],
)
def test_sl0_params_validation(kw):
    with pytest.raises(ValueError):
        Sl0Params(**kw)


# ---- smoothed l0 ---------------------------------------------------------


def test_zero_observation_gives_zero(sys8):
    np.testing.assert_array_equal(sl0_solve(sys8.H, np.zeros(32)), np.zeros(64))


@pytest.mark.parametrize("j", range(64))
def test_single_spike_recovered(sys8, j):
    z_true = np.zeros(64)
    z_true[j] = 100.0
    z = sl0_solve(sys8.H, sys8.H @ z_true)
    assert abs(z[j] - 100) < 1e-3
    assert np.max(np.abs(np.delete(z, j))) < 1e-3


def test_ten_spikes_recovered_99_of_100(sys8):
    rng = np.random.default_rng(2024)
    ok = 0
    for _ in range(100):
        z_true = spikes(rng, 64, 10, 0.0, 200.0)
        z = sl0_solve(sys8.H, sys8.H @ z_true)
        ok += rel_err(z, z_true) < 1e-3
    print(f"10-spike recovery: {ok}/100")
    assert ok >= 99


@pytest.mark.parametrize("params", [Sl0Params(), PLAIN], ids=["default", "plain"])
def test_sl0_always_feasible(sys8, rng, params):
    X = np.vstack([rng.normal(0, 50, (20, 32)), np.array([sys8.H @ spikes(rng, 64, k) for k in range(1, 31)])])
    Z = sl0_solve_batch(sys8.H, X, params)
    for z, x in zip(Z, X):
        assert residual(sys8.H, z, x) <= FEAS_TOL


def test_plain_sl0_recovers_interior_spikes(sys8):
    # textbook SL0 (no column scaling, no refit) still handles easy cases
    z_true = np.zeros(64)
    z_true[[10, 27, 44]] = [120.0, -80.0, 150.0]
    z = sl0_solve(sys8.H, sys8.H @ z_true, PLAIN)
    assert rel_err(z, z_true) < 1e-3


@pytest.mark.parametrize("c", [2.0, 10.0])
def test_scale_equivariance(sys8, c):
    rng = np.random.default_rng(7)
    for _ in range(20):
        z_true = spikes(rng, 64, int(rng.integers(1, 5)))
        x = sys8.H @ z_true
        z1 = sl0_solve(sys8.H, x)
        zc = sl0_solve(sys8.H, c * x)
        assert np.linalg.norm(zc - c * z1) <= 1e-6 * np.linalg.norm(c * z1)


def test_success_degrades_with_sparsity(sys8):
    """Recovery rate never climbs (beyond Monte Carlo noise) as k grows past the bound."""
    rng = np.random.default_rng(99)
    trials = 60
    rates = []
    for k in range(16, 32):
        Zt = np.array([spikes(rng, 64, k) for _ in range(trials)])
        Z = sl0_solve_batch(sys8.H, Zt @ sys8.H.T)
        rates.append(np.mean([rel_err(z, zt) < 1e-3 for z, zt in zip(Z, Zt)]))
    rates = np.array(rates)
    slack = 3 * np.sqrt(0.25 / trials)
    assert np.all(np.diff(rates) <= slack)
    assert rates[-1] <= rates[0]


def test_rank_deficient_h_raises():
    H = np.zeros((2, 4))
    H[0, :2] = H[1, :2] = 1.0
    H[0, 2:] = H[1, 2:] = 1.0
    with pytest.raises(SolverError):
        sl0_solve(H, np.ones(2), PLAIN)


def test_non_finite_input_rejected(sys8):
    x = np.zeros(32)
    x[3] = np.nan
    with pytest.raises(ValueError):
        sl0_solve(sys8.H, x)


# ---- known support -------------------------------------------------------


def test_known_support_empty(sys8):
    est = least_squares_known_support(sys8.H, np.ones(32), [])
    np.testing.assert_array_equal(est.values, np.zeros(64))
    assert est.support.size == 0


def test_known_support_exact(sys8):
    rng = np.random.default_rng(5)
    for _ in range(20):
        S = rng.choice(64, 20, replace=False)
        w = np.zeros(64)
        w[S] = rng.uniform(-200, 200, 20)
        est = least_squares_known_support(sys8.H, sys8.H @ w, S)
        assert rel_err(est.values, w) < 1e-8
        assert set(est.support) == set(S)


def test_known_support_capacity(sys8):
    with pytest.raises(CapacityExceededError):
        least_squares_known_support(sys8.H, np.ones(32), np.arange(33))


def test_known_support_singular_reports_condition(sys8):
    # a constant pixel column only excites the first coefficient row, all of
    # which sits in the retained head, so it lies in the null space of H
    col0 = [i for i, (u, v) in enumerate(sys8.order.forward) if v == 0]
    w = np.zeros(64)
    w[col0] = 1.0
    assert np.max(np.abs(sys8.H @ w)) < 1e-12
    with pytest.raises(SolverError, match="condition"):
        least_squares_known_support(sys8.H, np.ones(32), col0)


def test_known_support_residual_orthogonal(sys8, rng):
    S = rng.choice(64, 12, replace=False)
    x = rng.normal(0, 30, 32)
    est = least_squares_known_support(sys8.H, x, S)
    r = x - sys8.H @ est.values
    assert np.max(np.abs(sys8.H[:, S].T @ r)) < 1e-8


# ---- thresholding --------------------------------------------------------


def test_threshold_zero_vector():
    est = threshold_to_sparse(np.zeros(64), 3.0)
    assert est.support.size == 0


def test_threshold_keeps_large_entries():
    z = np.zeros(64)
    z[:3] = [0.01, 50, -0.02]
    est = threshold_to_sparse(z, 1.0)
    assert est.support.tolist() == [1]
    assert est.values[1] == 50 and np.count_nonzero(est.values) == 1


def test_threshold_zero_tau_is_nonzero_pattern(rng):
    z = np.where(rng.random(64) < 0.3, rng.normal(size=64), 0.0)
    est = threshold_to_sparse(z, 0.0)
    np.testing.assert_array_equal(est.support, np.flatnonzero(z))
    np.testing.assert_array_equal(est.values, z)
