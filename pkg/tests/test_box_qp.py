import numpy as np
import pytest

from app.exceptions import NotPositiveDefiniteError
from app.services.box_qp import BoxQPSettings, kkt_residual, solve_box_qp

from tests.oracles import enumerate_box_qp, random_spd


def test_unbounded_matches_linear_solve(rng):
    H = random_spd(rng, 6)
    g = rng.standard_normal(6)
    lower = np.full(6, -np.inf)
    upper = np.full(6, np.inf)
    x = solve_box_qp(H, g, lower, upper, np.zeros(6))
    np.testing.assert_allclose(x, np.linalg.solve(H, -g), atol=1e-10)


def test_matches_active_set_enumeration(rng):
    for _ in range(100):
        n_c = int(rng.integers(0, 3))
        n_d = int(rng.integers(1, 5))
        n = n_c + n_d
        H = random_spd(rng, n) + rng.uniform(0.5, 5.0) * np.eye(n)
        g = 3.0 * rng.standard_normal(n)
        lower = np.full(n, -np.inf)
        upper = np.full(n, np.inf)
        lower[n_c:] = rng.uniform(-1.0, 0.0, n_d)
        upper[n_c:] = lower[n_c:] + 1.0
        x = solve_box_qp(H, g, lower, upper, np.zeros(n))
        expected = enumerate_box_qp(H, g, lower, upper)
        np.testing.assert_allclose(x, expected, atol=1e-8)
        assert kkt_residual(H, g, lower, upper, x) <= 1e-9


def test_all_bounds_active():
    H = np.eye(2)
    g = np.array([10.0, -10.0])
    x = solve_box_qp(H, g, np.zeros(2), np.ones(2), np.full(2, 0.5))
    np.testing.assert_array_equal(x, [0.0, 1.0])


def test_start_outside_box_is_projected():
    H = 2.0 * np.eye(3)
    g = np.zeros(3)
    x = solve_box_qp(H, g, np.full(3, 1.0), np.full(3, 2.0), np.full(3, 5.0))
    np.testing.assert_allclose(x, np.ones(3))


def test_indefinite_free_block_raises():
    with pytest.raises(NotPositiveDefiniteError):
        solve_box_qp(np.diag([-1.0, 1.0]), np.ones(2), -np.ones(2), np.ones(2), np.zeros(2))


def test_settings_defaults():
    settings = BoxQPSettings()
    assert settings.kkt_tol == 1e-9
    assert settings.max_iter == 200
