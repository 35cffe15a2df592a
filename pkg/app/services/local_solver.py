"""
Локальная задача агента стадии I и регуляризация гессиана.

min_x f(x) + λᵀx + (ρ₁/2)‖x - z‖² решается демпфированным методом
Ньютона с поиском Армихо; гессианы аналитические, размерности малы.
"""

import logging
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh

from app.exceptions import NonConvergenceError
from app.models.mixed_vector import MixedVector, VectorLike, as_array
from app.schemas.params import NewtonSettings
from app.services.objectives import Objective


logger = logging.getLogger(__name__)

# Сдвиг спектра: H + 1.1(|σ| + 0.1)I при σ <= 0
SHIFT_FACTOR = 1.1
SHIFT_OFFSET = 0.1

# Ниже этого относительного наклона изменения φ неразличимы в double
FLAT_SLOPE = 1e-14

MAX_BACKTRACKS = 60


def min_eigenvalue(H: np.ndarray) -> float:
    return float(eigh(H, eigvals_only=True)[0])


def regularize(H: np.ndarray) -> np.ndarray:
    """
    Делает гессиан положительно определённым сдвигом спектра.

    Если минимальное собственное значение σ > 0, H возвращается без
    изменений, иначе H + 1.1(|σ| + 0.1)·I (минимум спектра ≥ 0.11).
    """
    sigma = min_eigenvalue(H)
    if sigma > 0:
        return H
    return H + SHIFT_FACTOR * (abs(sigma) + SHIFT_OFFSET) * np.eye(H.shape[0])


def _subproblem_value(obj: Objective, x: np.ndarray, lam: np.ndarray, z: np.ndarray, rho: float) -> float:
    diff = x - z
    return obj.value(x) + float(np.dot(lam, x)) + 0.5 * rho * float(np.dot(diff, diff))


def solve_local(
    obj: Objective,
    lam: np.ndarray,
    z: VectorLike,
    rho1: float,
    settings: Optional[NewtonSettings] = None,
    x0: Optional[VectorLike] = None
) -> MixedVector:
    """
    Решает локальную задачу агента.

    **Параметры:**
    - `obj`: функция агента f_i
    - `lam`: двойственная переменная λ_i
    - `z`: текущая глобальная точка z^{[k]}
    - `rho1`: штраф ρ₁ > 0
    - `settings`: настройки метода Ньютона
    - `x0`: тёплый старт (по умолчанию z)

    **Возвращает:**
    - `MixedVector`: x с ‖∇f(x) + λ + ρ₁(x - z)‖ ≤ grad_tol

    **Ошибки:**
    - `NonConvergenceError` с лучшей точкой и нормой градиента
    """
    settings = settings or NewtonSettings()
    if rho1 <= 0:
        raise ValueError("rho1 должен быть положительным")
    n_c = z.n_c if isinstance(z, MixedVector) else obj.n_c
    z_arr = as_array(z)
    lam = np.asarray(lam, dtype=np.float64)
    x = np.array(as_array(x0 if x0 is not None else z_arr), dtype=np.float64)
    identity = np.eye(x.size)

    best_x, best_norm = x.copy(), np.inf
    for step in range(settings.max_steps + 1):
        grad = obj.gradient(x) + lam + rho1 * (x - z_arr)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm < best_norm:
            best_x, best_norm = x.copy(), grad_norm
        if grad_norm <= settings.grad_tol:
            return MixedVector(x, n_c)
        if step == settings.max_steps:
            break

        hess = regularize(obj.hessian(x)) + rho1 * identity
        direction = -cho_solve(cho_factor(hess), grad)
        slope = float(np.dot(grad, direction))

        value = _subproblem_value(obj, x, lam, z_arr, rho1)
        t = 1.0
        if -slope > FLAT_SLOPE * max(1.0, abs(value)):
            for _ in range(MAX_BACKTRACKS):
                trial = _subproblem_value(obj, x + t * direction, lam, z_arr, rho1)
                if trial <= value + settings.armijo_c * t * slope:
                    break
                t *= settings.backtrack_factor
        x = x + t * direction

    raise NonConvergenceError(
        "Метод Ньютона не сошёлся в локальной задаче",
        best_iterate=best_x,
        residual=best_norm,
        context={"max_steps": settings.max_steps}
    )
