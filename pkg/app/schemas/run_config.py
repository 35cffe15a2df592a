"""
Pydantic схемы конфигурации прогона и параметров датчиков.

RunConfig сериализуется в JSON без потерь (model_dump_json / model_validate_json).
"""

from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from app.schemas.params import AlgoParams


# Вид тестовой задачи
class ProblemKind(str, Enum):
    CONVEX = "convex"
    NONCONVEX = "nonconvex"
    QUADRATIC_ORACLE = "quadratic-oracle"


class SensorParams(BaseModel):
    """
    Параметры одного агента в задаче локализации датчиков.

    Все три вектора берутся из стандартного нормального распределения.
    """

    zeta_alpha: List[float] = Field(..., description="ζ^α, длина n_c")
    zeta_beta: List[float] = Field(..., description="ζ^β, длина n_d")
    zeta_gamma: List[float] = Field(
        default_factory=list,
        description="ζ^γ, длина n_d (нужен только невыпуклой задаче)"
    )

    @field_validator("zeta_gamma")
    @classmethod
    def validate_zeta_gamma(cls, v, info):
        """ζ^γ либо пуст, либо той же длины, что ζ^β"""
        beta = info.data.get("zeta_beta")
        if v and beta is not None and len(v) != len(beta):
            raise ValueError("Длина ζ^γ должна совпадать с длиной ζ^β")
        return v

    model_config = {
        "extra": "forbid"
    }


class QuadraticParams(BaseModel):
    """Параметры агента ½ xᵀQx + cᵀx в задаче-оракуле"""

    Q: List[List[float]] = Field(..., description="SPD матрица Q")
    c: List[float] = Field(..., description="Линейный член c")

    model_config = {
        "extra": "forbid"
    }


class InstanceRecord(BaseModel):
    """
    Сгенерированный экземпляр задачи (пишется в instance.json).

    Заполняется либо `agents` (датчики), либо `quadratics` (оракул).
    """

    problem_kind: ProblemKind
    seed: int
    n_c: int
    n_d: int
    agents: List[SensorParams] = Field(default_factory=list)
    quadratics: List[QuadraticParams] = Field(default_factory=list)

    model_config = {
        "extra": "forbid"
    }


class RunConfig(BaseModel):
    """
    Конфигурация одного эксперимента.
    """

    problem_kind: ProblemKind = Field(ProblemKind.CONVEX, description="Вид задачи")
    num_agents: int = Field(20, ge=1, description="Число агентов N")
    n_c: int = Field(10, ge=0, description="Размер непрерывного блока")
    n_d: int = Field(10, ge=0, description="Размер булева блока")
    params: AlgoParams = Field(default_factory=AlgoParams)
    seed: int = Field(42, ge=0, lt=2 ** 64, description="Seed генератора (64 бита)")
    baseline: bool = Field(False, description="Запустить сравнение с ADMM")
    output_path: Optional[Path] = Field(None, description="Каталог результатов")

    @model_validator(mode="after")
    def validate_dimensions(self):
        """Невыпуклая задача требует n_c = n_d"""
        if self.problem_kind == ProblemKind.NONCONVEX and self.n_c != self.n_d:
            raise ValueError("Невыпуклая задача требует n_c = n_d")
        if self.n_c + self.n_d == 0:
            raise ValueError("Размерность задачи должна быть положительной")
        if self.baseline and self.problem_kind == ProblemKind.NONCONVEX:
            raise ValueError("ADMM запускается только на выпуклых задачах")
        return self

    model_config = {
        "extra": "forbid"
    }


def default_config(kind: ProblemKind = ProblemKind.CONVEX) -> RunConfig:
    """
    Конфигурация по умолчанию для вида задачи.

    Выпуклая: ρ₁ = ρ₂ = 10 и упрощённая координация.
    Невыпуклая: ρ₁ = ρ₂ = 10⁵, общая координация, внутренний цикл
    ограничен 50 итерациями.
    """
    kind = ProblemKind(kind)
    if kind == ProblemKind.NONCONVEX:
        params = AlgoParams(rho1=1e5, rho2=1e5, max_iter_inner=50)
    elif kind == ProblemKind.CONVEX:
        params = AlgoParams(rho1=10.0, rho2=10.0, convex_coordinator=True)
    else:
        params = AlgoParams()
    return RunConfig(problem_kind=kind, params=params)


def load_config(path: Path) -> RunConfig:
    """Читает RunConfig из JSON-файла."""
    return RunConfig.model_validate_json(Path(path).read_text(encoding="utf-8"))
