"""
Выпуклая квадратичная задача с ограничениями-ящиком.

min ½ xᵀHx + gᵀx  при  lower ≤ x ≤ upper

Проекционный метод Ньютона: зажатые координаты (на границе, градиент
наружу) фиксируются, по свободным делается шаг Ньютона, затем поиск
Армихо вдоль дуги проекции. Бесконечные границы допустимы.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from app.exceptions import NonConvergenceError, NotPositiveDefiniteError


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoxQPSettings:
    kkt_tol: float = 1e-9
    max_iter: int = 200
    armijo: float = 0.1
    step_dec: float = 0.6
    min_step: float = 1e-22


def kkt_residual(H: np.ndarray, g: np.ndarray, lower: np.ndarray, upper: np.ndarray, x: np.ndarray) -> float:
    """Норма проекционного градиента ‖x - P(x - ∇q(x))‖."""
    grad = H @ x + g
    return float(np.linalg.norm(x - np.clip(x - grad, lower, upper)))


def _value(H: np.ndarray, g: np.ndarray, x: np.ndarray) -> float:
    return float(x @ g + 0.5 * x @ H @ x)


def solve_box_qp(
    H: np.ndarray,
    g: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    x0: np.ndarray,
    settings: BoxQPSettings = BoxQPSettings()
) -> np.ndarray:
    """
    Решает box-QP проекционным методом Ньютона.

    **Возвращает:**
    - `np.ndarray`: точка с KKT-невязкой ≤ kkt_tol (или застой на уровне
      машинной точности)

    **Ошибки:**
    - `NotPositiveDefiniteError`, если свободный блок H не SPD
    - `NonConvergenceError` с лучшей точкой по невязке
    """
    x = np.clip(np.asarray(x0, dtype=np.float64), lower, upper)
    best_x, best_res = x.copy(), np.inf

    for _ in range(settings.max_iter):
        grad = H @ x + g
        residual = float(np.linalg.norm(x - np.clip(x - grad, lower, upper)))
        if residual < best_res:
            best_x, best_res = x.copy(), residual
        if residual <= settings.kkt_tol:
            return x

        # зажатые координаты
        clamped = ((x <= lower) & (grad > 0)) | ((x >= upper) & (grad < 0))
        free = ~clamped
        if not np.any(free):
            return x

        try:
            factor = cho_factor(H[np.ix_(free, free)])
        except LinAlgError as exc:
            raise NotPositiveDefiniteError("Свободный блок box-QP не положительно определён") from exc

        search = np.zeros_like(x)
        search[free] = -cho_solve(factor, grad[free])
        slope = float(np.dot(search, grad))
        if slope >= 0 or np.linalg.norm(search) <= 1e-15 * (1.0 + np.linalg.norm(x)):
            # шаг Ньютона неотличим от нуля
            return best_x

        # Армихо вдоль дуги проекции
        value = _value(H, g, x)
        step = 1.0
        candidate = np.clip(x + search, lower, upper)
        while (_value(H, g, candidate) - value) / (step * slope) < settings.armijo:
            step *= settings.step_dec
            if step < settings.min_step:
                break
            candidate = np.clip(x + step * search, lower, upper)
        x = candidate

    residual = kkt_residual(H, g, lower, upper, x)
    if residual <= best_res:
        best_x, best_res = x, residual
    if best_res <= settings.kkt_tol:
        return best_x
    raise NonConvergenceError(
        "Box-QP не сошёлся",
        best_iterate=best_x,
        residual=best_res,
        context={"max_iter": settings.max_iter}
    )
