import numpy as np
import pytest

from app.exceptions import DomainError, MaxOuterExceededError
from app.models import MixedVector, ProblemInstance, Stage, gamma
from app.schemas.params import AlgoParams
from app.schemas.run_config import SensorParams
from app.services.objectives import convex_sensor_objective
from app.services.stage1 import run_stage1
from app.services.stage2 import (
    check_lemma1,
    energy,
    run_stage2,
    stage2_qp,
    stage2_qp_accelerated,
    stage2_qp_exact_penalty,
)

from tests.oracles import enumerate_box_qp, grid_exact_penalty_min, grid_stage2_disc, random_spd


def random_point(rng, n_c, n_d):
    return MixedVector.from_blocks(rng.standard_normal(n_c), rng.uniform(0.0, 1.0, n_d))


# ========== stage2_qp ==========

def test_qp_fixed_point_without_gradient_and_penalty(rng):
    z_k = random_point(rng, 3, 4)
    z = stage2_qp(z_k, np.zeros(7), alpha=0.0, rho2=10.0, N=5)
    np.testing.assert_array_equal(z.data, z_k.data)


def test_qp_hand_example():
    z_k = MixedVector.from_blocks([], [0.6])
    z = stage2_qp(z_k, np.zeros(1), alpha=1.0, rho2=1.0, N=1)
    assert z.disc[0] == pytest.approx(0.8)


def test_qp_continuous_block_closed_form(rng):
    z_k = random_point(rng, 4, 2)
    g = rng.standard_normal(6)
    z = stage2_qp(z_k, g, alpha=3.0, rho2=2.0, N=5)
    np.testing.assert_allclose(z.cont, z_k.cont - g[:4] / 10.0)


def test_qp_matches_grid_search(rng):
    for _ in range(100):
        n_c, n_d = int(rng.integers(0, 3)), int(rng.integers(1, 5))
        N = int(rng.integers(1, 6))
        rho2 = rng.uniform(0.5, 10.0)
        alpha = rng.uniform(0.0, 20.0)
        z_k = random_point(rng, n_c, n_d)
        g = 5.0 * rng.standard_normal(n_c + n_d)
        z = stage2_qp(z_k, g, alpha, rho2, N)
        expected = grid_stage2_disc(z_k.disc, g[n_c:], alpha, N * rho2)
        np.testing.assert_allclose(z.disc, expected, atol=1e-4)
        assert np.all((z.disc >= 0.0) & (z.disc <= 1.0))


def test_qp_rejects_out_of_box_input():
    z_k = MixedVector.from_blocks([0.0], [1.2])
    with pytest.raises(DomainError):
        stage2_qp(z_k, np.zeros(2), 1.0, 1.0, 1)
    with pytest.raises(ValueError):
        stage2_qp(MixedVector.from_blocks([0.0], [0.5]), np.zeros(2), 1.0, 0.0, 1)


# ========== stage2_qp_accelerated ==========

def test_accelerated_with_zero_hessians_equals_closed_form(rng):
    for _ in range(50):
        n_c, n_d, N = 2, 3, int(rng.integers(1, 5))
        z_k = random_point(rng, n_c, n_d)
        g = 5.0 * rng.standard_normal(n_c + n_d)
        alpha, rho2 = rng.uniform(0.0, 10.0), rng.uniform(0.5, 5.0)
        zeros = [np.zeros((n_c + n_d, n_c + n_d))] * N
        fast = stage2_qp_accelerated(z_k, g, zeros, alpha, rho2)
        plain = stage2_qp(z_k, g, alpha, rho2, N)
        np.testing.assert_allclose(fast.data, plain.data, atol=1e-10)


def test_accelerated_interior_matches_linear_solve(rng):
    n_c, n_d, N = 3, 3, 4
    z_k = MixedVector.from_blocks(rng.standard_normal(n_c), np.full(n_d, 0.5))
    H_list = [random_spd(rng, n_c + n_d) for _ in range(N)]
    g = 0.01 * rng.standard_normal(n_c + n_d)
    rho2 = 2.0
    z = stage2_qp_accelerated(z_k, g, H_list, alpha=0.0, rho2=rho2)
    M = sum(H_list) + N * rho2 * np.eye(n_c + n_d)
    expected = z_k.data + np.linalg.solve(M, -g)
    assert np.all((expected[n_c:] > 0.0) & (expected[n_c:] < 1.0))
    np.testing.assert_allclose(z.data, expected, atol=1e-8)


def test_accelerated_matches_active_set_enumeration(rng):
    for _ in range(100):
        n_c, n_d = int(rng.integers(0, 3)), int(rng.integers(1, 5))
        n = n_c + n_d
        N = int(rng.integers(1, 4))
        z_k = random_point(rng, n_c, n_d)
        H_list = [random_spd(rng, n) for _ in range(N)]
        g = 5.0 * rng.standard_normal(n)
        alpha, rho2 = rng.uniform(0.0, 10.0), rng.uniform(0.5, 5.0)
        z = stage2_qp_accelerated(z_k, g, H_list, alpha, rho2)

        M = sum(H_list) + N * rho2 * np.eye(n)
        linear = g.copy()
        linear[n_c:] += alpha * (1.0 - 2.0 * z_k.disc)
        lower = np.full(n, -np.inf)
        upper = np.full(n, np.inf)
        lower[n_c:] = -z_k.disc
        upper[n_c:] = 1.0 - z_k.disc
        delta = enumerate_box_qp(M, linear, lower, upper)
        np.testing.assert_allclose(z.data, z_k.data + delta, atol=1e-8)


# ========== Точный штраф ==========

def test_exact_penalty_is_coordinatewise_optimal(rng):
    for _ in range(50):
        n_c, n_d, N = 1, 3, int(rng.integers(1, 4))
        rho2, alpha = rng.uniform(0.5, 5.0), rng.uniform(0.0, 20.0)
        z_k = random_point(rng, n_c, n_d)
        g = 3.0 * rng.standard_normal(n_c + n_d)
        z = stage2_qp_exact_penalty(z_k, g, alpha, rho2, N)
        scale = N * rho2
        for j in range(n_d):
            v, zk, gj = z.disc[j], z_k.disc[j], g[n_c + j]
            value = 0.5 * scale * (v - zk) ** 2 + gj * v + alpha * (1.0 - v) * v
            assert value <= grid_exact_penalty_min(zk, gj, alpha, scale) + 1e-9


# ========== energy и check_lemma1 ==========

def test_energy_examples(small_convex_problem):
    problem = small_convex_problem
    z = MixedVector.from_blocks(np.zeros(problem.n_c), np.full(problem.n_d, 0.5))
    assert energy(problem, z, 0.0) == problem.total_objective(z)
    expected = sum(
        0.5 * np.dot(obj.zeta_alpha, obj.zeta_alpha) + 0.5 * np.sum((0.5 - obj.zeta_beta) ** 2)
        for obj in problem.objectives
    ) + 0.25 * problem.n_d
    assert energy(problem, z, 1.0) == pytest.approx(expected, rel=1e-12)
    boolean = MixedVector.from_blocks(np.zeros(problem.n_c), np.array([0.0, 1.0, 1.0, 0.0]))
    assert energy(problem, boolean, 1e6) == problem.total_objective(boolean)


def test_lemma1_fixed_point_holds(rng):
    z_k = random_point(rng, 2, 3)
    assert check_lemma1(rng.standard_normal(5), z_k, z_k, 4.0, 10.0, 3)


def test_lemma1_holds_for_qp_steps(rng):
    for _ in range(200):
        n_c, n_d, N = 2, 3, int(rng.integers(1, 5))
        z_k = random_point(rng, n_c, n_d)
        g = 5.0 * rng.standard_normal(n_c + n_d)
        alpha, rho2 = rng.uniform(0.0, 50.0), rng.uniform(0.5, 10.0)
        z_k1 = stage2_qp(z_k, g, alpha, rho2, N)
        assert check_lemma1(g, z_k, z_k1, alpha, rho2, N)


def test_lemma1_fails_for_uphill_step():
    z_k = MixedVector.from_blocks([], [0.5])
    z_k1 = MixedVector.from_blocks([], [0.6])
    assert not check_lemma1(np.array([1.0]), z_k, z_k1, 1.0, 1.0, 1)


# ========== run_stage2 ==========

def test_boolean_stationary_start_terminates_immediately():
    obj = convex_sensor_objective(SensorParams(zeta_alpha=[0.3, -0.2], zeta_beta=[1.0, 0.0]))
    problem = ProblemInstance(num_agents=1, n_c=2, n_d=2, objectives=[obj], lipschitz_bound=1.0)
    z_init = MixedVector.from_blocks([0.3, -0.2], [1.0, 0.0])
    result = run_stage2(problem, AlgoParams(), z_init)
    assert result.outer_bumps == 0
    assert result.inner_iterations_total == 1
    assert result.final_alpha == 1.0
    np.testing.assert_array_equal(result.z_rounded.data, z_init.data)
    assert result.final_inner_converged
    assert result.inner_loops_converged == 1


def test_convex_benchmark(convex_config, convex_problem):
    params = convex_config.params
    stage1 = run_stage1(convex_problem, params)
    result = run_stage2(convex_problem, params, stage1.z_star)

    assert gamma(result.z_star) < params.eps_outer
    # N = 20, α₀ = 1, β = 2: при α > N/2 внутренняя неподвижная точка неустойчива,
    # поэтому хватает 3–4 увеличений α
    assert 1 <= result.outer_bumps <= 60
    assert 50 <= result.inner_iterations_total <= 1000
    assert result.final_inner_converged
    assert result.inner_loops_converged == result.outer_bumps + 1
    assert result.lemma1_violations == 0
    assert result.energy_enforced
    assert result.energy_violations == 0
    assert stage1.relaxed_objective <= result.final_objective + 1e-8
    assert set(result.z_rounded.disc.tolist()) <= {0.0, 1.0}

    inner = [r for r in result.trace if r.stage == Stage.STAGE2_INNER]
    bumps = [r for r in result.trace if r.stage == Stage.STAGE2_OUTER_BUMP]
    assert len(inner) == result.inner_iterations_total
    assert len(bumps) == result.outer_bumps
    assert all(np.all((r.z.disc >= 0.0) & (r.z.disc <= 1.0)) for r in inner)
    assert result.final_alpha == params.alpha0 * params.beta ** result.outer_bumps
    for before, after in zip([params.alpha0] + [b.alpha for b in bumps], [b.alpha for b in bumps]):
        assert after == before * params.beta
    assert len(result.gamma_history) == result.outer_bumps + 1
    assert result.gamma_history[-1] < params.eps_outer


def test_convex_energy_decreases_within_inner_loops(convex_config, convex_problem):
    params = convex_config.params
    stage1 = run_stage1(convex_problem, params)
    result = run_stage2(convex_problem, params, stage1.z_star)
    previous = energy(convex_problem, stage1.z_star.clamp_disc(), params.alpha0)
    for record in result.trace:
        if record.stage == Stage.STAGE2_INNER and record.step_norm > 0:
            assert record.energy < previous + 1e-10
        previous = record.energy


def test_nonconvex_benchmark(nonconvex_config, nonconvex_problem):
    params = nonconvex_config.params
    stage1 = run_stage1(nonconvex_problem, params)
    result = run_stage2(nonconvex_problem, params, stage1.z_star)
    assert gamma(result.z_star) < params.eps_outer
    assert result.inner_iterations_total < 2000
    assert result.lemma1_violations == 0

    last_bump = max((r.iter for r in result.trace if r.stage == Stage.STAGE2_OUTER_BUMP), default=0)
    last_loop = result.inner_iterations_total - last_bump
    assert result.inner_loops_converged <= result.outer_bumps + 1
    if not result.final_inner_converged:
        assert last_loop == params.max_iter_inner


def test_accelerated_variant_converges(small_convex_config, small_convex_problem):
    params = small_convex_config.params.model_copy(update={"accelerated": True})
    stage1 = run_stage1(small_convex_problem, params)
    result = run_stage2(small_convex_problem, params, stage1.z_star)
    assert gamma(result.z_star) < params.eps_outer
    assert result.lemma1_violations == 0
    assert stage1.relaxed_objective <= result.final_objective + 1e-8


def test_max_outer_exceeded_carries_best_iterate():
    obj = convex_sensor_objective(SensorParams(zeta_alpha=[0.1], zeta_beta=[0.4, 0.7]))
    problem = ProblemInstance(num_agents=1, n_c=1, n_d=2, objectives=[obj], lipschitz_bound=1.0)
    params = AlgoParams(alpha0=0.01, beta=1.01, max_outer=1)
    with pytest.raises(MaxOuterExceededError) as info:
        run_stage2(problem, params, MixedVector.from_blocks([0.1], [0.4, 0.7]))
    best = info.value.best_iterate
    assert isinstance(best, MixedVector)
    assert info.value.best_gamma == pytest.approx(gamma(best))
    assert info.value.best_gamma >= params.eps_outer
    assert info.value.context["stage"] == "Stage2"


def test_inner_loop_cap_is_reported(small_convex_config, small_convex_problem, caplog):
    params = small_convex_config.params.model_copy(update={"max_iter_inner": 1, "eps_inner": 1e-300})
    stage1 = run_stage1(small_convex_problem, params)
    with caplog.at_level("WARNING", logger="app.services.stage2"):
        result = run_stage2(small_convex_problem, params, stage1.z_star)
    assert gamma(result.z_star) < params.eps_outer
    assert result.inner_iterations_total == result.outer_bumps + 1
    assert result.inner_loops_converged == 0
    assert not result.final_inner_converged
    assert any("остановленном по лимиту" in record.getMessage() for record in caplog.records)
