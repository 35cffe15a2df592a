"""
Базовый метод для сравнения: консенсусный ADMM с проекцией булева блока.

Релаксация решается стандартным ADMM в масштабированной двойственной форме,
булев блок z проецируется на [0, 1] на каждой итерации и округляется до
{0, 1} только в конце. Гарантий сходимости нет; применяется к выпуклым задачам.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from app.exceptions import NonConvergenceError
from app.models.mixed_vector import MixedVector, gamma
from app.models.problem import ProblemInstance
from app.models.trace import Stage, TraceRecord
from app.schemas.params import NewtonSettings
from app.services.agents import map_agents
from app.services.local_solver import solve_local


logger = logging.getLogger(__name__)


@dataclass
class AdmmState:
    x_list: List[MixedVector]
    z: MixedVector
    u_list: List[np.ndarray]
    rho: float

    def primal_residual(self) -> float:
        """Σ ‖x_i - z‖"""
        return float(sum(np.linalg.norm(x.data - self.z.data) for x in self.x_list))


@dataclass
class AdmmResult:
    z_rounded: MixedVector
    objective: float
    trace: List[TraceRecord] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    residuals: List[float] = field(default_factory=list)


def run_admm_projected(
    problem: ProblemInstance,
    rho: float,
    max_iter: int = 2000,
    tol: float = 1e-6,
    newton: Optional[NewtonSettings] = None,
    max_workers: Optional[int] = None
) -> AdmmResult:
    """
    Запускает ADMM с проекцией.

    **Итерация:**
    1. x_i ← argmin f_i(x) + (ρ/2)‖x - z + u_i‖²  (параллельно по агентам)
    2. z ← среднее (x_i + u_i), булев блок отсекается в [0, 1]
    3. u_i ← u_i + x_i - z

    Остановка: Σ‖x_i - z‖ ≤ tol и ‖Δz‖ ≤ tol, либо max_iter.
    При исчерпании лимита результат возвращается с converged=False.
    """
    if rho <= 0:
        raise ValueError("rho должен быть положительным")
    if not problem.convex:
        logger.warning("ADMM применяется к невыпуклой задаче, гарантий нет")

    newton = newton or NewtonSettings()
    z = problem.zeros()
    state = AdmmState(
        x_list=[z for _ in range(problem.num_agents)],
        z=z,
        u_list=[np.zeros(problem.dim) for _ in range(problem.num_agents)],
        rho=rho
    )
    trace: List[TraceRecord] = []
    residuals: List[float] = []
    converged = False

    logger.info("ADMM: N=%d, ρ=%g, max_iter=%d", problem.num_agents, rho, max_iter)

    iteration = 0
    for iteration in range(1, max_iter + 1):
        z_prev = state.z

        # (ρ/2)‖x - z + u‖² отличается от λᵀx + (ρ/2)‖x - z‖² с λ = ρu на константу
        def local_step(index: int, u: np.ndarray) -> MixedVector:
            try:
                return solve_local(
                    problem.objectives[index], rho * u, z_prev, rho, newton,
                    x0=state.x_list[index]
                )
            except NonConvergenceError as exc:
                raise exc.with_context(stage="Baseline", agent=index, iteration=iteration)

        state.x_list = map_agents(local_step, state.u_list, max_workers)

        average = sum(x.data + u for x, u in zip(state.x_list, state.u_list)) / problem.num_agents
        state.z = z_prev.with_data(average).clamp_disc()
        state.u_list = [u + x.data - state.z.data for x, u in zip(state.x_list, state.u_list)]

        residual = state.primal_residual()
        residuals.append(residual)
        step = float(np.linalg.norm(state.z.data - z_prev.data))
        trace.append(TraceRecord(
            stage=Stage.BASELINE,
            iter=iteration,
            z=state.z,
            step_norm=step,
            objective=problem.total_objective(state.z),
            gamma=gamma(state.z),
            alpha=0.0
        ))

        if residual <= tol and step <= tol:
            converged = True
            break

    if not converged:
        logger.warning("ADMM не сошёлся за %d итераций (невязка %.3e)", max_iter, residuals[-1])

    z_rounded = state.z.round_disc()
    objective = problem.total_objective(z_rounded)
    logger.info("ADMM завершён: %d итераций, целевая функция %.6g", iteration, objective)
    return AdmmResult(
        z_rounded=z_rounded,
        objective=objective,
        trace=trace,
        iterations=iteration,
        converged=converged,
        residuals=residuals
    )
