import numpy as np
import pytest

from app.exceptions import DimensionMismatchError, NotPositiveDefiniteError
from app.schemas.run_config import SensorParams
from app.services.objectives import (
    convex_sensor_objective,
    estimate_lipschitz,
    nonconvex_sensor_objective,
    quadratic_objective,
    zero_objective,
)

from tests.oracles import fd_gradient, fd_hessian


def sensor_params(rng, n_c=4, n_d=4, with_gamma=True):
    return SensorParams(
        zeta_alpha=rng.standard_normal(n_c).tolist(),
        zeta_beta=rng.standard_normal(n_d).tolist(),
        zeta_gamma=rng.standard_normal(n_d).tolist() if with_gamma else []
    )


def test_convex_sensor_value_and_metadata():
    obj = convex_sensor_objective(SensorParams(zeta_alpha=[1.0, 2.0], zeta_beta=[0.5]))
    assert obj.convex
    assert obj.lipschitz == 1.0
    x = np.array([0.0, 0.0, 0.0])
    assert obj.value(x) == pytest.approx(0.5 * (1.0 + 4.0 + 0.25))
    np.testing.assert_allclose(obj.gradient(x), [-1.0, -2.0, -0.5])
    np.testing.assert_array_equal(obj.hessian(x), np.eye(3))


def test_objective_rejects_wrong_dimension():
    obj = convex_sensor_objective(SensorParams(zeta_alpha=[1.0], zeta_beta=[0.5]))
    with pytest.raises(DimensionMismatchError):
        obj.value(np.zeros(3))


@pytest.mark.parametrize("factory", [convex_sensor_objective, nonconvex_sensor_objective])
def test_sensor_derivatives_match_finite_differences(rng, factory):
    obj = factory(sensor_params(rng))
    for _ in range(20):
        x = rng.standard_normal(obj.dim)
        grad = obj.gradient(x)
        fd = fd_gradient(obj.value, x)
        assert np.linalg.norm(fd - grad) <= 1e-5 * max(1.0, np.linalg.norm(grad))
        hess = obj.hessian(x)
        fd_h = fd_hessian(obj.gradient, x)
        assert np.linalg.norm(fd_h - hess) <= 1e-4 * max(1.0, np.linalg.norm(hess))


def test_nonconvex_sensor_metadata(rng):
    obj = nonconvex_sensor_objective(sensor_params(rng))
    assert not obj.convex
    assert obj.lipschitz is None
    assert obj.strong_convexity is None


def test_nonconvex_sensor_can_be_indefinite():
    obj = nonconvex_sensor_objective(SensorParams(zeta_alpha=[0.0], zeta_beta=[0.0], zeta_gamma=[3.0]))
    # d = 0: h = -2ζ^γ = -6, собственные значения 1 и 1 + 2h
    assert np.linalg.eigvalsh(obj.hessian(np.zeros(2)))[0] == pytest.approx(-11.0)


def test_nonconvex_requires_equal_blocks(rng):
    with pytest.raises(DimensionMismatchError):
        nonconvex_sensor_objective(sensor_params(rng, n_c=3, n_d=4))
    with pytest.raises(DimensionMismatchError):
        nonconvex_sensor_objective(sensor_params(rng, with_gamma=False))


def test_quadratic_objective(rng):
    B = rng.standard_normal((5, 5))
    Q = B.T @ B + np.eye(5)
    c = rng.standard_normal(5)
    obj = quadratic_objective(Q, c, n_c=3)
    assert (obj.n_c, obj.n_d) == (3, 2)
    eigenvalues = np.linalg.eigvalsh(Q)
    assert obj.lipschitz == pytest.approx(eigenvalues[-1])
    assert obj.strong_convexity == pytest.approx(eigenvalues[0])
    x = rng.standard_normal(5)
    np.testing.assert_allclose(obj.gradient(x), Q @ x + c)
    np.testing.assert_allclose(fd_gradient(obj.value, x), obj.gradient(x), rtol=1e-6, atol=1e-7)


def test_quadratic_objective_requires_spd():
    with pytest.raises(NotPositiveDefiniteError):
        quadratic_objective(np.diag([1.0, -1.0]), np.zeros(2))
    with pytest.raises(NotPositiveDefiniteError):
        quadratic_objective(np.array([[1.0, 0.5], [0.0, 1.0]]), np.zeros(2))
    with pytest.raises(DimensionMismatchError):
        quadratic_objective(np.eye(2), np.zeros(3))


def test_zero_objective():
    obj = zero_objective(2, 3)
    x = np.ones(5)
    assert obj.value(x) == 0.0
    np.testing.assert_array_equal(obj.gradient(x), np.zeros(5))
    np.testing.assert_array_equal(obj.hessian(x), np.zeros((5, 5)))


def test_estimate_lipschitz_convex_sensor(rng):
    obj = convex_sensor_objective(sensor_params(rng, with_gamma=False))
    assert estimate_lipschitz(obj, (-3.0, 3.0), 16) == pytest.approx(1.1)


def test_estimate_lipschitz_zero_and_samples():
    obj = zero_objective(2, 2)
    assert estimate_lipschitz(obj, (-1.0, 1.0), 4) == 0.0
    with pytest.raises(ValueError):
        estimate_lipschitz(obj, (-1.0, 1.0), 1)


def test_estimate_lipschitz_nonconvex_is_deterministic_and_grows_with_box(rng):
    obj = nonconvex_sensor_objective(sensor_params(rng))
    small = estimate_lipschitz(obj, (-1.0, 1.0), 32, seed=7)
    assert small == estimate_lipschitz(obj, (-1.0, 1.0), 32, seed=7)
    assert estimate_lipschitz(obj, (-3.0, 3.0), 32, seed=7) > small
