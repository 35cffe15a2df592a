"""
Оркестрация экспериментов.

Генерация экземпляров по seed, полный прогон стадий I и II, сравнение
с ADMM, аудит инвариантов и запись результатов.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from app.config import get_settings
from app.exceptions import InvariantViolationError
from app.models.mixed_vector import gamma
from app.models.problem import ProblemInstance
from app.models.trace import Stage
from app.schemas.run_config import (
    InstanceRecord,
    ProblemKind,
    QuadraticParams,
    RunConfig,
    SensorParams,
)
from app.schemas.summary import AuditReport, CompareReport, ComparisonBlock, RunSummary
from app.services.baseline_admm import AdmmResult, run_admm_projected
from app.services.objectives import (
    convex_sensor_objective,
    estimate_lipschitz,
    nonconvex_sensor_objective,
    quadratic_objective,
)
from app.services.output import write_json, write_trace_csv
from app.services.stage1 import Stage1Result, initial_point, run_stage1
from app.services.stage2 import Stage2Result, iterates_inside_box, run_stage2


logger = logging.getLogger(__name__)

# Допуск проверки нижней оценки стадии I
LOWER_BOUND_TOL = 1e-8

# Допуск проверки α_k = α₀ β^k
ALPHA_REL_TOL = 1e-12

ADMM_MAX_ITER = 2000
ADMM_TOL = 1e-6

# Относительный допуск сравнения целевых функций с ADMM
NOT_WORSE_TOL = 1e-9

# Порог R² для аудита линейной сходимости
R_SQUARED_THRESHOLD = 0.98

# Окно аудита стадии I: длина кривой невязки и отрезок подгонки
AUDIT_HORIZON = 200
AUDIT_FIT_START = 20
AUDIT_FIT_END = 200


# ========== Генерация экземпляров ==========

def draw_instance(config: RunConfig) -> InstanceRecord:
    """
    Разыгрывает параметры агентов генератором PCG64(seed).

    Порядок выборки фиксирован: для каждого агента ζ^α (n_c), ζ^β (n_d),
    затем ζ^γ (n_d, только невыпуклая задача). Для задачи-оракула:
    A (n×n) и c (n), Q = AᵀA/n + I.
    """
    rng = np.random.Generator(np.random.PCG64(config.seed))
    n = config.n_c + config.n_d
    record = InstanceRecord(problem_kind=config.problem_kind, seed=config.seed, n_c=config.n_c, n_d=config.n_d)

    for _ in range(config.num_agents):
        if config.problem_kind == ProblemKind.QUADRATIC_ORACLE:
            A = rng.standard_normal((n, n))
            Q = A.T @ A / n + np.eye(n)
            c = rng.standard_normal(n)
            record.quadratics.append(QuadraticParams(Q=Q.tolist(), c=c.tolist()))
            continue
        zeta_alpha = rng.standard_normal(config.n_c)
        zeta_beta = rng.standard_normal(config.n_d)
        zeta_gamma = rng.standard_normal(config.n_d).tolist() if config.problem_kind == ProblemKind.NONCONVEX else []
        record.agents.append(SensorParams(
            zeta_alpha=zeta_alpha.tolist(),
            zeta_beta=zeta_beta.tolist(),
            zeta_gamma=zeta_gamma
        ))
    return record


def build_problem(record: InstanceRecord) -> ProblemInstance:
    """
    Собирает ProblemInstance из записи экземпляра.

    L: 1 для выпуклых датчиков, max λ_max(Q_i) для оракула, выборочная
    оценка на кубе [-b, b]^n для невыпуклой задачи.
    """
    settings = get_settings()
    kind = ProblemKind(record.problem_kind)

    if kind == ProblemKind.QUADRATIC_ORACLE:
        objectives = [quadratic_objective(np.array(q.Q), np.array(q.c), n_c=record.n_c) for q in record.quadratics]
        lipschitz = max(objective.lipschitz for objective in objectives)
    elif kind == ProblemKind.NONCONVEX:
        objectives = [nonconvex_sensor_objective(params) for params in record.agents]
        box = (-settings.lipschitz_box, settings.lipschitz_box)
        lipschitz = max(
            estimate_lipschitz(objective, box, settings.lipschitz_samples, seed=record.seed + index)
            for index, objective in enumerate(objectives)
        )
    else:
        objectives = [convex_sensor_objective(params) for params in record.agents]
        lipschitz = max(objective.lipschitz for objective in objectives)

    return ProblemInstance(
        num_agents=len(objectives),
        n_c=record.n_c,
        n_d=record.n_d,
        objectives=objectives,
        lipschitz_bound=lipschitz,
        kind=kind.value
    )


def generate_instance(config: RunConfig) -> ProblemInstance:
    """
    Экземпляр задачи по конфигурации.

    Один и тот же seed даёт побитово одинаковый экземпляр.
    """
    return build_problem(draw_instance(config))


# ========== Полный прогон ==========

@dataclass
class ExperimentReport:
    """
    Результат run_experiment.

    `invariant_violations` — обязательные инварианты, нарушение которых
    делает код возврата ненулевым.
    """

    config: RunConfig
    instance: InstanceRecord
    problem: ProblemInstance
    stage1: Stage1Result
    stage2: Stage2Result
    summary: RunSummary
    admm: Optional[AdmmResult] = None
    invariant_violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.invariant_violations


def _audit_invariants(
    problem: ProblemInstance,
    config: RunConfig,
    stage1: Stage1Result,
    stage2: Stage2Result,
    within_box: bool
) -> List[str]:
    params = config.params
    violations: List[str] = []

    bound_holds = stage1.relaxed_objective <= stage2.final_objective + LOWER_BOUND_TOL
    if problem.convex and stage1.converged:
        if not bound_holds:
            violations.append("stage1_lower_bound")
    else:
        reason = "задача невыпукла" if not problem.convex else "стадия I не сошлась"
        log = logger.info if bound_holds else logger.warning
        log(
            "Нижняя оценка стадии I не проверяется (%s): %.6g против %.6g",
            reason, stage1.relaxed_objective, stage2.final_objective
        )

    if stage2.lemma1_violations and not params.exact_penalty:
        violations.append("lemma1")

    if stage2.energy_violations and stage2.energy_enforced and within_box:
        violations.append("energy_descent")

    inner = [r for r in stage2.trace if r.stage == Stage.STAGE2_INNER]
    if any(np.any(r.z.disc < 0.0) or np.any(r.z.disc > 1.0) for r in inner):
        violations.append("box_invariance")

    alphas = [r.alpha for r in stage2.trace]
    expected_alpha = params.alpha0 * params.beta ** stage2.outer_bumps
    if any(b < a for a, b in zip(alphas, alphas[1:])) or \
            abs(stage2.final_alpha - expected_alpha) > ALPHA_REL_TOL * expected_alpha:
        violations.append("alpha_monotonicity")

    if not np.all(np.isin(stage2.z_rounded.disc, (0.0, 1.0))):
        violations.append("rounded_boolean")

    for name in violations:
        logger.error("Нарушен инвариант: %s", name)
    return violations


def _comparison(stage2: Stage2Result, admm: AdmmResult, rho: float) -> ComparisonBlock:
    caladin = stage2.final_objective
    return ComparisonBlock(
        caladin_objective=caladin,
        admm_objective=admm.objective,
        admm_iterations=admm.iterations,
        admm_converged=admm.converged,
        admm_rho=rho,
        caladin_not_worse=caladin <= admm.objective + NOT_WORSE_TOL * max(1.0, abs(admm.objective)),
        relative_gap=(caladin - admm.objective) / max(1.0, abs(admm.objective))
    )


def run_experiment(config: RunConfig, max_workers: Optional[int] = None) -> ExperimentReport:
    """
    Полный прогон: стадия I, стадия II, при необходимости ADMM.

    Если задан `config.output_path`, туда пишутся trace.csv, summary.json,
    config.resolved.json, instance.json и (с baseline) baseline_trace.csv.

    **Ошибки:**
    - ошибки модулей всплывают с контекстом стадии / агента / итерации
    """
    settings = get_settings()
    params = config.params
    logger.info(
        "🚀 Эксперимент: %s, N=%d, n_c=%d, n_d=%d, seed=%d",
        config.problem_kind.value, config.num_agents, config.n_c, config.n_d, config.seed
    )

    instance = draw_instance(config)
    problem = build_problem(instance)

    z0, lambda0 = initial_point(problem, params, seed=config.seed)
    stage1 = run_stage1(problem, params, z0=z0, lambda0=lambda0, max_workers=max_workers)
    stage2 = run_stage2(problem, params, stage1.z_star, max_workers=max_workers)

    if problem.kind == ProblemKind.NONCONVEX.value:
        within_box = iterates_inside_box(stage2, settings.lipschitz_box)
        if not within_box:
            logger.warning(
                "Итерации стадии II вышли из куба [-%g, %g]: проверка энергии только считается",
                settings.lipschitz_box, settings.lipschitz_box
            )
    else:
        within_box = True

    violations = _audit_invariants(problem, config, stage1, stage2, within_box)

    admm = None
    comparison = None
    if config.baseline:
        admm = run_admm_projected(problem, params.rho1, ADMM_MAX_ITER, ADMM_TOL, max_workers=max_workers)
        comparison = _comparison(stage2, admm, params.rho1)

    summary = RunSummary(
        problem_kind=config.problem_kind,
        seed=config.seed,
        num_agents=config.num_agents,
        n_c=config.n_c,
        n_d=config.n_d,
        stage1_iterations=stage1.iterations,
        stage1_converged=stage1.converged,
        relaxed_objective=stage1.relaxed_objective,
        stage2_inner_iterations=stage2.inner_iterations_total,
        outer_bumps=stage2.outer_bumps,
        final_alpha=stage2.final_alpha,
        final_gamma=gamma(stage2.z_star),
        final_objective=stage2.final_objective,
        lemma1_violations=stage2.lemma1_violations,
        energy_violations=stage2.energy_violations,
        energy_enforced=stage2.energy_enforced and within_box,
        lipschitz_bound=problem.lipschitz_bound,
        stage2_within_box=within_box,
        stage2_converged=gamma(stage2.z_star) < params.eps_outer,
        stage2_inner_loops_converged=stage2.inner_loops_converged,
        stage2_final_inner_converged=stage2.final_inner_converged,
        trace_rows=len(stage1.trace) + len(stage2.trace),
        gamma_history=stage2.gamma_history,
        z_rounded=stage2.z_rounded.data.tolist(),
        invariant_violations=violations,
        comparison=comparison
    )

    report = ExperimentReport(
        config=config,
        instance=instance,
        problem=problem,
        stage1=stage1,
        stage2=stage2,
        summary=summary,
        admm=admm,
        invariant_violations=violations
    )

    if config.output_path is not None:
        write_outputs(report, Path(config.output_path))

    if report.ok:
        logger.info("✅ Эксперимент завершён: целевая функция %.6g", summary.final_objective)
    else:
        logger.error("❌ Эксперимент завершён с нарушениями: %s", ", ".join(violations))
    return report


def write_outputs(report: ExperimentReport, out_dir: Path) -> None:
    """Пишет все файлы прогона в каталог."""
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = write_trace_csv(out_dir / "trace.csv", report.stage1.trace + report.stage2.trace)
    if rows != report.summary.trace_rows:
        raise InvariantViolationError(
            f"В trace.csv записано {rows} строк вместо {report.summary.trace_rows}",
            {"invariant": "trace_rows"}
        )
    write_json(out_dir / "summary.json", report.summary)
    write_json(out_dir / "config.resolved.json", report.config)
    write_json(out_dir / "instance.json", report.instance)
    if report.admm is not None:
        write_trace_csv(out_dir / "baseline_trace.csv", report.admm.trace)
    logger.info("Результаты записаны в %s", out_dir)


# ========== Аудит линейной сходимости стадии I ==========

@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


def stage1_residual_curve(
    problem: ProblemInstance,
    config: RunConfig,
    horizon: int,
    max_workers: Optional[int] = None
) -> List[float]:
    """
    ‖z^{[k]} - z̃*‖² для k = 1..horizon.

    z̃* — последняя итерация эталонного прогона длиной 2·horizon без
    остановки по допуску. Первые horizon итераций эталона совпадают с
    прогоном длины horizon, поэтому хватает одного прогона.
    """
    params = config.params.model_copy(update={
        "max_iter_stage1": 2 * horizon,
        "eps_stage1": float(np.finfo(np.float64).tiny)
    })
    z0, lambda0 = initial_point(problem, params, seed=config.seed)
    reference = run_stage1(problem, params, z0=z0, lambda0=lambda0, max_workers=max_workers)
    z_ref = reference.z_star.data
    return [
        float(np.sum((record.z.data - z_ref) ** 2))
        for record in reference.trace[:horizon]
    ]


def fit_log_linear(residuals: Sequence[float], start: int, end: int) -> LinearFit:
    """
    МНК-прямая log(residual) от номера итерации на отрезке [start, end].

    Нумерация итераций с 1; нулевые невязки пропускаются.
    """
    iterations = np.arange(1, len(residuals) + 1)
    values = np.asarray(residuals, dtype=np.float64)
    mask = (iterations >= start) & (iterations <= end) & (values > 0)
    if np.count_nonzero(mask) < 3:
        raise ValueError("Для оценки наклона нужно не менее трёх положительных невязок")
    result = stats.linregress(iterations[mask], np.log(values[mask]))
    return LinearFit(slope=float(result.slope), intercept=float(result.intercept), r_squared=float(result.rvalue ** 2))


def audit_stage1(
    config: RunConfig,
    seeds: Sequence[int],
    horizon: int = AUDIT_HORIZON,
    fit_start: int = AUDIT_FIT_START,
    fit_end: int = AUDIT_FIT_END,
    max_workers: Optional[int] = None
) -> Tuple[AuditReport, List[Tuple[int, List[float]]]]:
    """
    Аудит линейной сходимости стадии I по нескольким seed.

    **Возвращает:**
    - `AuditReport` и кривые невязок (seed, список ‖z^{[k]} - z̃*‖²)
    """
    if not fit_start < fit_end <= horizon:
        raise ValueError("Нужно fit_start < fit_end ≤ horizon")

    curves: List[Tuple[int, List[float]]] = []
    fits: List[LinearFit] = []
    for seed in seeds:
        seeded = RunConfig.model_validate({**config.model_dump(), "seed": seed})
        problem = generate_instance(seeded)
        residuals = stage1_residual_curve(problem, seeded, horizon, max_workers)
        fit = fit_log_linear(residuals, fit_start, fit_end)
        logger.info("Аудит seed=%d: наклон %.4f, R² = %.4f", seed, fit.slope, fit.r_squared)
        curves.append((seed, residuals))
        fits.append(fit)

    slopes = [fit.slope for fit in fits]
    r_squared = [fit.r_squared for fit in fits]
    report = AuditReport(
        problem_kind=config.problem_kind,
        seeds=list(seeds),
        horizon=horizon,
        fit_start=fit_start,
        fit_end=fit_end,
        slopes=slopes,
        r_squared=r_squared,
        mean_slope=float(np.mean(slopes)),
        min_r_squared=float(np.min(r_squared)),
        linear=all(s < 0 for s in slopes) and min(r_squared) >= R_SQUARED_THRESHOLD
    )
    return report, curves


# ========== Сравнение с ADMM по seed ==========

def compare_seeds(
    config: RunConfig,
    seeds: Sequence[int],
    max_workers: Optional[int] = None
) -> Tuple[CompareReport, List[ExperimentReport]]:
    """
    Прогоняет Mix-CALADIN и ADMM на нескольких seed.

    При заданном `config.output_path` результаты каждого seed пишутся
    в подкаталог seed_<n>.
    """
    reports: List[ExperimentReport] = []
    for seed in seeds:
        update = {"seed": seed, "baseline": True}
        if config.output_path is not None:
            update["output_path"] = Path(config.output_path) / f"seed_{seed}"
        reports.append(run_experiment(RunConfig.model_validate({**config.model_dump(), **update}), max_workers))

    comparisons = [report.summary.comparison for report in reports]
    losses = [max(0.0, block.relative_gap) for block in comparisons if not block.caladin_not_worse]
    compare = CompareReport(
        seeds=list(seeds),
        caladin_objectives=[block.caladin_objective for block in comparisons],
        admm_objectives=[block.admm_objective for block in comparisons],
        wins=sum(block.caladin_not_worse for block in comparisons),
        max_relative_loss=max(losses, default=0.0)
    )
    logger.info("Сравнение с ADMM: %d из %d seed не хуже", compare.wins, len(seeds))
    return compare, reports
