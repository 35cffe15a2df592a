"""
Исключения предметной области.

Все ошибки алгоритма наследуются от MixCaladinError и несут словарь
context (стадия, агент, итерация), который попадает в лог и в отчёт.
"""

from typing import Any, Dict, Optional

import numpy as np


class MixCaladinError(Exception):
    """
    Базовая ошибка пакета.

    **Параметры:**
    - `message`: человекочитаемое описание
    - `context`: стадия / агент / итерация, где возникла ошибка
    """

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = dict(context or {})

    def with_context(self, **context: Any) -> "MixCaladinError":
        """Дополняет контекст и возвращает само исключение (для повторного raise)."""
        self.context.update(context)
        return self

    def __str__(self) -> str:
        if not self.context:
            return self.message
        details = ", ".join(f"{key}={value}" for key, value in self.context.items())
        return f"{self.message} [{details}]"


class DimensionMismatchError(MixCaladinError, ValueError):
    """Размерности векторов или матриц не согласованы"""


class NotPositiveDefiniteError(MixCaladinError, ValueError):
    """Матрица должна быть симметричной положительно определённой"""


class DomainError(MixCaladinError, ValueError):
    """Аргумент вне области определения операции"""


class NonConvergenceError(MixCaladinError):
    """
    Итерационный метод исчерпал лимит шагов.

    Хранит лучшую найденную точку и финальную невязку.
    """

    def __init__(
        self,
        message: str,
        best_iterate: np.ndarray,
        residual: float,
        context: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, context)
        self.best_iterate = best_iterate
        self.residual = residual


class MaxOuterExceededError(MixCaladinError):
    """
    Внешний цикл Stage II исчерпал лимит увеличений α.

    `best_iterate` — итерация с наименьшим γ.
    """

    def __init__(
        self,
        message: str,
        best_iterate: Any,
        best_gamma: float,
        context: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, context)
        self.best_iterate = best_iterate
        self.best_gamma = best_gamma


class InvariantViolationError(MixCaladinError):
    """Нарушен инвариант, который прогон обязан соблюдать"""
