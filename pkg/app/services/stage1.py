"""
Стадия I: CALADIN на непрерывной релаксации.

Итерация: параллельные локальные задачи -> градиенты и гессианы агентов ->
координация в замкнутой форме. Булев блок на этой стадии не ограничен.
Стадия завершается, когда ‖z^{[k+1]} - z^{[k]}‖ ≤ ε.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from app.exceptions import NonConvergenceError
from app.models.mixed_vector import MixedVector, gamma
from app.models.problem import AgentState, ProblemInstance
from app.models.trace import Stage, TraceRecord
from app.schemas.params import AlgoParams, NewtonSettings
from app.services.agents import map_agents
from app.services.local_solver import min_eigenvalue, regularize, solve_local


logger = logging.getLogger(__name__)

# Допуск проверки Σλ_i = 0 после координации
DUAL_SUM_TOL = 1e-8


@dataclass
class Stage1Result:
    """
    Результат стадии I.

    `relaxed_objective` = Σ f_i(z̃*) — нижняя оценка для выпуклых задач.
    """

    z_star: MixedVector
    relaxed_objective: float
    iterations: int
    converged: bool
    trace: List[TraceRecord] = field(default_factory=list)
    agent_states: List[AgentState] = field(default_factory=list)


def coordinate_general(agents: Sequence[AgentState]) -> Tuple[MixedVector, List[np.ndarray]]:
    """
    Координация с гессианами агентов.

    z = (Σ H_i)⁻¹ Σ (H_i x_i - g_i),  λ_i = H_i (x_i - z) - g_i.

    Это KKT-точка консенсусной QP
    min Σ ½Δx_iᵀH_iΔx_i + g_iᵀΔx_i  при  x_i + Δx_i = z.
    """
    template = agents[0].x
    hess_sum = sum(agent.hess for agent in agents)
    rhs = sum(agent.hess @ agent.x.data - agent.grad for agent in agents)
    z = cho_solve(cho_factor(hess_sum), rhs)
    lambdas = [agent.hess @ (agent.x.data - z) - agent.grad for agent in agents]
    return template.with_data(z), lambdas


def coordinate_convex(agents: Sequence[AgentState], rho1: float) -> Tuple[MixedVector, List[np.ndarray]]:
    """
    Упрощённая координация для выпуклых задач (H_i заменены на ρ₁I).

    z = (1/N) Σ (x_i - g_i/ρ₁),  λ_i = ρ₁(x_i - z) - g_i.
    """
    if rho1 <= 0:
        raise ValueError("rho1 должен быть положительным")
    template = agents[0].x
    z = sum(agent.x.data - agent.grad / rho1 for agent in agents) / len(agents)
    lambdas = [rho1 * (agent.x.data - z) - agent.grad for agent in agents]
    return template.with_data(z), lambdas


def initial_point(
    problem: ProblemInstance,
    params: AlgoParams,
    seed: int = 0
) -> Tuple[MixedVector, List[np.ndarray]]:
    """
    Начальные z⁰ и λ_i⁰.

    По умолчанию нули; при random_init — стандартные нормальные величины
    из отдельного потока генератора, производного от seed.
    """
    if not params.random_init:
        return problem.zeros(), [np.zeros(problem.dim) for _ in range(problem.num_agents)]
    rng = np.random.Generator(np.random.PCG64([seed, 1]))
    z0 = MixedVector(rng.standard_normal(problem.dim), problem.n_c)
    lambda0 = [rng.standard_normal(problem.dim) for _ in range(problem.num_agents)]
    return z0, lambda0


def run_stage1(
    problem: ProblemInstance,
    params: AlgoParams,
    z0: Optional[MixedVector] = None,
    lambda0: Optional[Sequence[np.ndarray]] = None,
    newton: Optional[NewtonSettings] = None,
    max_workers: Optional[int] = None
) -> Stage1Result:
    """
    Запускает стадию I.

    **Параметры:**
    - `problem`: экземпляр задачи
    - `params`: параметры алгоритма (ρ₁, ε, лимит итераций, вид координации)
    - `z0`, `lambda0`: начальная точка (по умолчанию нули)
    - `newton`: настройки локального метода Ньютона
    - `max_workers`: потоки для параллельных локальных задач

    **Возвращает:**
    - `Stage1Result`: z̃*, нижняя оценка, трасса, состояния агентов

    **Ошибки:**
    - `NonConvergenceError` локального метода с номером агента и итерации
    """
    newton = newton or NewtonSettings()
    z = z0 if z0 is not None else problem.zeros()
    lambdas = [np.asarray(lam, dtype=np.float64) for lam in lambda0] if lambda0 is not None \
        else [np.zeros(problem.dim) for _ in range(problem.num_agents)]
    agents = [AgentState(x=z, lam=lam) for lam in lambdas]
    trace: List[TraceRecord] = []
    converged = False

    logger.info(
        "Стадия I: N=%d, n_c=%d, n_d=%d, ρ₁=%g, координация=%s",
        problem.num_agents, problem.n_c, problem.n_d, params.rho1,
        "convex" if params.convex_coordinator else "general"
    )

    iteration = 0
    for iteration in range(1, params.max_iter_stage1 + 1):
        def local_step(index: int, agent: AgentState) -> AgentState:
            objective = problem.objectives[index]
            try:
                x = solve_local(objective, agent.lam, z, params.rho1, newton, x0=agent.x)
            except NonConvergenceError as exc:
                raise exc.with_context(stage="Stage1", agent=index, iteration=iteration)
            updated = AgentState(x=x, lam=agent.lam)
            grad = objective.gradient(x)
            if params.convex_coordinator:
                updated.update_gradient(grad)
            else:
                hess = objective.hessian(x)
                updated.update_curvature(grad, regularize(hess), sigma=min_eigenvalue(hess))
            return updated

        agents = map_agents(local_step, agents, max_workers)

        if params.convex_coordinator:
            z_next, lambdas = coordinate_convex(agents, params.rho1)
        else:
            z_next, lambdas = coordinate_general(agents)
        for agent, lam in zip(agents, lambdas):
            agent.lam = lam

        dual_sum = float(np.linalg.norm(sum(lambdas)))
        if dual_sum > DUAL_SUM_TOL * max(1.0, max(np.linalg.norm(lam) for lam in lambdas)):
            logger.warning("Стадия I, итерация %d: ‖Σλ_i‖ = %.3e", iteration, dual_sum)

        step = float(np.linalg.norm(z_next.data - z.data))
        z = z_next
        trace.append(TraceRecord(
            stage=Stage.STAGE1,
            iter=iteration,
            z=z,
            step_norm=step,
            objective=problem.total_objective(z),
            gamma=gamma(z),
            alpha=0.0
        ))
        logger.debug("Стадия I, итерация %d: ‖Δz‖ = %.3e", iteration, step)

        if step <= params.eps_stage1:
            converged = True
            break

    if converged:
        logger.info("Стадия I сошлась за %d итераций", iteration)
    else:
        logger.warning("Стадия I не сошлась за %d итераций", params.max_iter_stage1)

    return Stage1Result(
        z_star=z,
        relaxed_objective=problem.total_objective(z),
        iterations=iteration,
        converged=converged,
        trace=trace,
        agent_states=agents
    )
