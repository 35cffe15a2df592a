import numpy as np
import pytest

from app.models import MixedVector, ProblemInstance, Stage, gamma
from app.schemas.run_config import SensorParams
from app.services.baseline_admm import AdmmState, run_admm_projected
from app.services.objectives import convex_sensor_objective, zero_objective
from app.services.stage1 import run_stage1
from app.services.stage2 import run_stage2


def test_single_agent_rounds_up():
    obj = convex_sensor_objective(SensorParams(zeta_alpha=[0.1, -0.2], zeta_beta=[0.7, 0.9, 1.3]))
    problem = ProblemInstance(num_agents=1, n_c=2, n_d=3, objectives=[obj])
    result = run_admm_projected(problem, rho=10.0)
    assert result.converged
    np.testing.assert_array_equal(result.z_rounded.disc, [1.0, 1.0, 1.0])
    np.testing.assert_allclose(result.z_rounded.cont, [0.1, -0.2], atol=1e-5)


def test_zero_objectives_fixed_point():
    problem = ProblemInstance(num_agents=3, n_c=2, n_d=2, objectives=[zero_objective(2, 2) for _ in range(3)])
    result = run_admm_projected(problem, rho=1.0, max_iter=50)
    assert result.converged
    assert result.objective == 0.0
    assert result.iterations == 1


def test_rejects_nonpositive_rho(small_convex_problem):
    with pytest.raises(ValueError):
        run_admm_projected(small_convex_problem, rho=0.0)


def test_admm_state_primal_residual():
    z = MixedVector.zeros(1, 1)
    state = AdmmState(
        x_list=[MixedVector(np.array([3.0, 4.0]), 1), z],
        z=z,
        u_list=[np.zeros(2), np.zeros(2)],
        rho=1.0
    )
    assert state.primal_residual() == pytest.approx(5.0)


def test_convex_benchmark_baseline(convex_config, convex_problem):
    result = run_admm_projected(convex_problem, rho=convex_config.params.rho1)
    assert gamma(result.z_rounded) == 0.0
    assert set(result.z_rounded.disc.tolist()) <= {0.0, 1.0}
    assert len(result.trace) == result.iterations == len(result.residuals)
    assert all(record.stage == Stage.BASELINE for record in result.trace)
    assert all(np.all((r.z.disc >= 0.0) & (r.z.disc <= 1.0)) for r in result.trace)
    tail = result.residuals[len(result.residuals) // 2:]
    for before, after in zip(tail, tail[1:]):
        assert after <= before + 1e-12


def test_mix_caladin_not_worse_than_admm(convex_config, convex_problem):
    params = convex_config.params
    stage1 = run_stage1(convex_problem, params)
    stage2 = run_stage2(convex_problem, params, stage1.z_star)
    admm = run_admm_projected(convex_problem, rho=params.rho1)
    assert stage2.final_objective <= admm.objective * (1 + 1e-6) + 1e-9
