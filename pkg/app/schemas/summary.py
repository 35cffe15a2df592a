"""
Pydantic схемы отчётов: summary.json и audit.json.

Набор ключей фиксирован, лишние ключи запрещены.
"""

from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from app.schemas.run_config import ProblemKind


class ComparisonBlock(BaseModel):
    """
    Сравнение с ADMM на том же экземпляре.
    """

    caladin_objective: float = Field(..., description="Целевая функция Mix-CALADIN в округлённой точке")
    admm_objective: float = Field(..., description="Целевая функция ADMM в округлённой точке")
    admm_iterations: int = Field(..., ge=0)
    admm_converged: bool
    admm_rho: float = Field(..., gt=0)
    caladin_not_worse: bool = Field(..., description="caladin_objective ≤ admm_objective")
    relative_gap: float = Field(..., description="(caladin - admm) / max(1, |admm|)")

    model_config = {
        "extra": "forbid"
    }


class RunSummary(BaseModel):
    """
    Итог одного прогона (summary.json).
    """

    problem_kind: ProblemKind
    seed: int
    num_agents: int
    n_c: int
    n_d: int

    stage1_iterations: int = Field(..., ge=0)
    stage1_converged: bool
    relaxed_objective: float = Field(..., description="Σ f_i(z̃*) — нижняя оценка для выпуклых задач")

    stage2_inner_iterations: int = Field(..., ge=0)
    outer_bumps: int = Field(..., ge=0)
    final_alpha: float
    final_gamma: float
    final_objective: float = Field(..., description="Σ f_i в округлённой точке")
    lemma1_violations: int = Field(..., ge=0)
    energy_violations: int = Field(..., ge=0)
    energy_enforced: bool
    lipschitz_bound: Optional[float] = None
    stage2_within_box: bool
    stage2_converged: bool
    stage2_inner_loops_converged: int = Field(..., ge=0, description="Внутренних циклов, закончившихся по ε_inner")
    stage2_final_inner_converged: bool = Field(..., description="Последний внутренний цикл закончился по ε_inner")

    trace_rows: int = Field(..., ge=0, description="Строк в trace.csv")
    gamma_history: List[float] = Field(default_factory=list, description="γ в конце каждого внутреннего цикла")
    z_rounded: List[float] = Field(default_factory=list)
    invariant_violations: List[str] = Field(default_factory=list)
    comparison: Optional[ComparisonBlock] = None

    @model_validator(mode="after")
    def validate_trace_rows(self):
        """Число строк трассы совпадает со счётчиками итераций"""
        expected = self.stage1_iterations + self.stage2_inner_iterations + self.outer_bumps
        if self.trace_rows != expected:
            raise ValueError(f"trace_rows={self.trace_rows}, ожидалось {expected}")
        return self

    model_config = {
        "extra": "forbid"
    }


class AuditReport(BaseModel):
    """
    Аудит линейной сходимости стадии I (audit.json).

    Прямая по log‖z^{[k]} - z̃*‖² на отрезке итераций [fit_start, fit_end].
    """

    problem_kind: ProblemKind
    seeds: List[int]
    horizon: int = Field(..., ge=1)
    fit_start: int = Field(..., ge=1)
    fit_end: int = Field(..., ge=1)
    slopes: List[float]
    r_squared: List[float]
    mean_slope: float
    min_r_squared: float
    linear: bool = Field(..., description="Все наклоны отрицательны и R² ≥ порога")

    model_config = {
        "extra": "forbid"
    }


class CompareReport(BaseModel):
    """
    Сравнение с ADMM по нескольким seed (compare.json).
    """

    seeds: List[int]
    caladin_objectives: List[float]
    admm_objectives: List[float]
    wins: int = Field(..., ge=0, description="Seed, где Mix-CALADIN не хуже ADMM")
    max_relative_loss: float = Field(..., ge=0, description="Наибольшее относительное отставание от ADMM")

    model_config = {
        "extra": "forbid"
    }
