"""
Pydantic схемы параметров алгоритма.
"""

from pydantic import BaseModel, Field, model_validator


class AlgoParams(BaseModel):
    """
    Параметры Mix-CALADIN.

    Значения по умолчанию соответствуют выпуклому эталону
    (ρ₁ = ρ₂ = 10, α₀ = 1, β = 2).
    """

    rho1: float = Field(10.0, gt=0, description="Штраф ρ₁ стадии I")
    rho2: float = Field(10.0, gt=0, description="Штраф ρ₂ стадии II")
    alpha0: float = Field(1.0, gt=0, description="Начальный вес α")
    beta: float = Field(2.0, gt=1, description="Множитель роста α")

    eps_stage1: float = Field(1e-6, gt=0, description="Порог ‖Δz‖ для перехода в стадию II")
    eps_inner: float = Field(1e-6, gt=0, description="Порог ‖Δz‖ внутреннего цикла")
    eps_outer: float = Field(1e-6, gt=0, description="Порог γ внешнего цикла")

    max_iter_stage1: int = Field(500, ge=1, description="Лимит итераций стадии I")
    max_iter_inner: int = Field(1000, ge=1, description="Лимит итераций одного внутреннего цикла")
    max_outer: int = Field(100, ge=1, description="Лимит увеличений α")

    accelerated: bool = Field(False, description="Координатор с гессианами агентов")
    convex_coordinator: bool = Field(False, description="Упрощённая координация для выпуклых задач")
    exact_penalty: bool = Field(
        False,
        description="Экспериментально: невыпуклый штраф α(1 - z_d)ᵀz_d без линеаризации"
    )
    random_init: bool = Field(False, description="Случайные z⁰, λ⁰ из seed прогона")

    @model_validator(mode="after")
    def validate_variant(self):
        """Ускоренный и точный штраф взаимоисключающие"""
        if self.accelerated and self.exact_penalty:
            raise ValueError("accelerated и exact_penalty нельзя включать одновременно")
        return self

    model_config = {
        "extra": "forbid",
        "frozen": True
    }


class NewtonSettings(BaseModel):
    """Настройки демпфированного метода Ньютона для локальных задач"""

    grad_tol: float = Field(1e-10, gt=0, description="Порог нормы градиента")
    max_steps: int = Field(100, ge=1, description="Лимит шагов Ньютона")
    armijo_c: float = Field(1e-4, gt=0, lt=1, description="Константа Армихо")
    backtrack_factor: float = Field(0.5, gt=0, lt=1, description="Множитель дробления шага")

    model_config = {
        "extra": "forbid",
        "frozen": True
    }
