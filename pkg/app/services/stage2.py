"""
Стадия II: двухуровневый цикл с гомотопией булева штрафа.

Внутренний уровень: агенты считают g_i = ∇f_i(z^{[k]}), координатор решает
QP с линеаризованным штрафом α(1 - 2z_d^{[k]})ᵀz_d на ящике 0 ≤ z_d ≤ 1.
Внешний уровень: пока γ ≥ ε_outer, α ← βα.

Во время прогона проверяются неравенство убывания для шага QP и
монотонность энергии E(z) = Σ f_i(z) + αγ(z).
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from app.exceptions import DomainError, MaxOuterExceededError
from app.models.mixed_vector import BOX_SLACK, MixedVector, gamma
from app.models.problem import ProblemInstance
from app.models.trace import Stage, TraceRecord
from app.schemas.params import AlgoParams
from app.services.agents import map_agents
from app.services.box_qp import BoxQPSettings, solve_box_qp
from app.services.local_solver import regularize


logger = logging.getLogger(__name__)

# Допуски проверок во время прогона
LEMMA_TOL = 1e-9
ENERGY_TOL = 1e-10


@dataclass
class Stage2Result:
    """
    Результат стадии II.

    `z_rounded` — z_star с булевым блоком, округлённым до {0, 1};
    `final_objective` считается в z_rounded.
    `inner_loops_converged` — сколько внутренних циклов закончились по
    ε_inner, а не по лимиту; `final_inner_converged` — то же для последнего.
    """

    z_star: MixedVector
    z_rounded: MixedVector
    final_objective: float
    inner_iterations_total: int
    outer_bumps: int
    final_alpha: float
    trace: List[TraceRecord] = field(default_factory=list)
    lemma1_violations: int = 0
    energy_violations: int = 0
    energy_enforced: bool = False
    gamma_history: List[float] = field(default_factory=list)
    inner_loops_converged: int = 0
    final_inner_converged: bool = True


def _check_box(z_k: MixedVector) -> None:
    disc = z_k.disc
    if np.any(disc < -BOX_SLACK) or np.any(disc > 1.0 + BOX_SLACK):
        raise DomainError("z_d^{[k]} вне [0, 1] на входе QP стадии II")


def _penalty_vector(z_k: MixedVector, alpha: float) -> np.ndarray:
    """α(1 - 2z_d^{[k]}) на булевом блоке, 0 на непрерывном."""
    penalty = np.zeros(z_k.dim)
    penalty[z_k.n_c:] = alpha * (1.0 - 2.0 * z_k.disc)
    return penalty


def stage2_qp(z_k: MixedVector, g_sum: np.ndarray, alpha: float, rho2: float, N: int) -> MixedVector:
    """
    Точный минимизатор QP координатора в замкнутой форме.

    min (Nρ₂/2)‖z - z^{[k]}‖² + zᵀΣg_i + α(1 - 2z_d^{[k]})ᵀz_d,  0 ≤ z_d ≤ 1.

    Задача сепарабельна, поэтому для булева блока достаточно отсечения.
    """
    if rho2 <= 0 or N < 1:
        raise ValueError("Нужны rho2 > 0 и N ≥ 1")
    _check_box(z_k)
    scale = N * rho2
    z = z_k.data - (np.asarray(g_sum) + _penalty_vector(z_k, alpha)) / scale
    z[z_k.n_c:] = np.clip(z[z_k.n_c:], 0.0, 1.0)
    return z_k.with_data(z)


def stage2_qp_exact_penalty(z_k: MixedVector, g_sum: np.ndarray, alpha: float, rho2: float, N: int) -> MixedVector:
    """
    Экспериментальный вариант с невыпуклым штрафом α(1 - z_d)ᵀz_d.

    По каждой булевой координате сравниваются стационарная точка
    одномерной параболы (если она выпукла и лежит в [0, 1]) и концы отрезка.
    При α > Nρ₂/2 задача невыпукла и численно неустойчива.
    """
    _check_box(z_k)
    scale = N * rho2
    g_sum = np.asarray(g_sum)
    z = z_k.data - g_sum / scale
    zk_d = z_k.disc
    g_d = g_sum[z_k.n_c:]

    def objective(v: np.ndarray) -> np.ndarray:
        return 0.5 * scale * (v - zk_d) ** 2 + g_d * v + alpha * (1.0 - v) * v

    curvature = scale - 2.0 * alpha
    candidates = [np.zeros_like(zk_d), np.ones_like(zk_d)]
    if curvature > 0:
        candidates.append(np.clip((scale * zk_d - g_d - alpha) / curvature, 0.0, 1.0))
    values = np.stack([objective(c) for c in candidates])
    z[z_k.n_c:] = np.stack(candidates)[np.argmin(values, axis=0), np.arange(zk_d.size)]
    return z_k.with_data(z)


def stage2_qp_accelerated(
    z_k: MixedVector,
    g_sum: np.ndarray,
    H_list: Sequence[np.ndarray],
    alpha: float,
    rho2: float,
    settings: BoxQPSettings = BoxQPSettings()
) -> MixedVector:
    """
    QP координатора с кривизной агентов.

    min Σ ½(z - z^{[k]})ᵀ(H_i + ρ₂I)(z - z^{[k]}) + zᵀΣg_i + α(1 - 2z_d^{[k]})ᵀz_d
    при 0 ≤ z_d ≤ 1. Решается проекционным методом Ньютона в приращениях.
    """
    if rho2 <= 0:
        raise ValueError("rho2 должен быть положительным")
    _check_box(z_k)
    N = len(H_list)
    hess = sum(H_list) + N * rho2 * np.eye(z_k.dim)
    linear = np.asarray(g_sum) + _penalty_vector(z_k, alpha)

    lower = np.full(z_k.dim, -np.inf)
    upper = np.full(z_k.dim, np.inf)
    lower[z_k.n_c:] = -z_k.disc
    upper[z_k.n_c:] = 1.0 - z_k.disc

    delta = solve_box_qp(hess, linear, lower, upper, np.zeros(z_k.dim), settings)
    z = z_k.data + delta
    z[z_k.n_c:] = np.clip(z[z_k.n_c:], 0.0, 1.0)
    return z_k.with_data(z)


def energy(problem: ProblemInstance, z: MixedVector, alpha: float) -> float:
    """E(z) = Σ f_i(z) + α γ(z)."""
    return problem.total_objective(z) + alpha * gamma(z)


def check_lemma1(
    g_sum: np.ndarray,
    z_k: MixedVector,
    z_k1: MixedVector,
    alpha: float,
    rho2: float,
    N: int,
    tol: float = LEMMA_TOL
) -> bool:
    """
    Неравенство убывания для шага QP:

    Σg_iᵀ(z_{k+1} - z_k) ≤ α(γ_k - γ_{k+1}) - (Nρ₂/2)‖z_{k+1} - z_k‖² + tol.
    """
    step = z_k1.data - z_k.data
    step_d = step[z_k.n_c:]
    # γ_k - γ_{k+1} в приращениях: без вычитания близких чисел при большом α
    gamma_drop = float(np.dot(step_d, step_d) - np.dot(1.0 - 2.0 * z_k.disc, step_d))
    lhs = float(np.dot(g_sum, step))
    rhs = alpha * gamma_drop - 0.5 * N * rho2 * float(np.dot(step, step))
    return lhs <= rhs + tol


def _inside_box(z: MixedVector, half_width: float) -> bool:
    return bool(np.all(np.abs(z.data) <= half_width))


def run_stage2(
    problem: ProblemInstance,
    params: AlgoParams,
    z_init: MixedVector,
    max_workers: Optional[int] = None
) -> Stage2Result:
    """
    Запускает стадию II.

    **Параметры:**
    - `problem`: экземпляр задачи (lipschitz_bound нужен для проверки энергии)
    - `params`: ρ₂, α₀, β, ε_inner, ε_outer, лимиты, вариант QP
    - `z_init`: выход стадии I; булев блок отсекается в [0, 1]

    **Возвращает:**
    - `Stage2Result`

    **Ошибки:**
    - `MaxOuterExceededError` с итерацией наименьшего γ
    """
    N = problem.num_agents
    z = z_init.clamp_disc()
    alpha = params.alpha0
    lipschitz = problem.lipschitz_bound
    energy_enforced = lipschitz is not None and params.rho2 > lipschitz and not params.exact_penalty

    trace: List[TraceRecord] = []
    gamma_history: List[float] = []
    lemma_violations = 0
    energy_violations = 0
    total_inner = 0
    bumps = 0
    loops_converged = 0
    best_z, best_gamma = z, gamma(z)

    logger.info(
        "Стадия II: ρ₂=%g, L=%s, α₀=%g, β=%g, вариант=%s",
        params.rho2, lipschitz, alpha, params.beta,
        "accelerated" if params.accelerated else ("exact" if params.exact_penalty else "linearized")
    )

    while True:
        # ========== Внутренний уровень ==========
        inner_converged = False
        for _ in range(params.max_iter_inner):
            point = z.data

            def evaluate(index: int, objective):
                if params.accelerated:
                    return objective.gradient(point), regularize(objective.hessian(point))
                return objective.gradient(point), None

            evaluations = map_agents(evaluate, problem.objectives, max_workers)
            g_sum = sum(grad for grad, _ in evaluations)

            if params.accelerated:
                z_next = stage2_qp_accelerated(z, g_sum, [hess for _, hess in evaluations], alpha, params.rho2)
            elif params.exact_penalty:
                z_next = stage2_qp_exact_penalty(z, g_sum, alpha, params.rho2, N)
            else:
                z_next = stage2_qp(z, g_sum, alpha, params.rho2, N)

            total_inner += 1
            step = float(np.linalg.norm(z_next.data - z.data))

            if not check_lemma1(g_sum, z, z_next, alpha, params.rho2, N):
                lemma_violations += 1
                logger.warning("Стадия II, итерация %d: нарушено неравенство убывания QP", total_inner)

            energy_before = energy(problem, z, alpha)
            energy_after = energy(problem, z_next, alpha)
            if step > 0 and energy_after >= energy_before + ENERGY_TOL:
                energy_violations += 1
                log = logger.error if energy_enforced else logger.debug
                log(
                    "Стадия II, итерация %d: энергия выросла на %.3e",
                    total_inner, energy_after - energy_before
                )

            z = z_next
            trace.append(TraceRecord(
                stage=Stage.STAGE2_INNER,
                iter=total_inner,
                z=z,
                step_norm=step,
                objective=problem.total_objective(z),
                gamma=gamma(z),
                alpha=alpha,
                energy=energy_after
            ))

            if step <= params.eps_inner:
                inner_converged = True
                break

        if inner_converged:
            loops_converged += 1
        else:
            logger.debug("Внутренний цикл остановлен по лимиту %d итераций", params.max_iter_inner)

        # ========== Внешний уровень ==========
        current_gamma = gamma(z)
        gamma_history.append(current_gamma)
        if current_gamma < best_gamma:
            best_z, best_gamma = z, current_gamma
        if current_gamma < params.eps_outer:
            break
        if bumps >= params.max_outer:
            raise MaxOuterExceededError(
                "Стадия II: исчерпан лимит увеличений α",
                best_iterate=best_z,
                best_gamma=best_gamma,
                context={"stage": "Stage2", "alpha": alpha, "iterations": total_inner}
            )

        alpha *= params.beta
        bumps += 1
        trace.append(TraceRecord(
            stage=Stage.STAGE2_OUTER_BUMP,
            iter=total_inner,
            z=z,
            step_norm=0.0,
            objective=problem.total_objective(z),
            gamma=current_gamma,
            alpha=alpha,
            energy=energy(problem, z, alpha)
        ))
        logger.debug("Стадия II: γ = %.3e, α увеличен до %g", current_gamma, alpha)

    if not inner_converged:
        logger.warning(
            "Стадия II: γ < ε_outer достигнуто в цикле, остановленном по лимиту %d итераций "
            "(‖Δz‖ = %.3e > ε_inner); сошлось циклов: %d из %d",
            params.max_iter_inner, step, loops_converged, bumps + 1
        )

    z_rounded = z.round_disc()
    logger.info(
        "Стадия II завершена: %d итераций, %d увеличений α, γ = %.3e",
        total_inner, bumps, gamma(z)
    )
    return Stage2Result(
        z_star=z,
        z_rounded=z_rounded,
        final_objective=problem.total_objective(z_rounded),
        inner_iterations_total=total_inner,
        outer_bumps=bumps,
        final_alpha=alpha,
        trace=trace,
        lemma1_violations=lemma_violations,
        energy_violations=energy_violations,
        energy_enforced=energy_enforced,
        gamma_history=gamma_history,
        inner_loops_converged=loops_converged,
        final_inner_converged=inner_converged
    )


def iterates_inside_box(result: Stage2Result, half_width: float) -> bool:
    """Все ли итерации стадии II остались в кубе [-b, b]^n."""
    return all(_inside_box(record.z, half_width) for record in result.trace)
