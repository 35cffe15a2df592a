"""
Целевые функции агентов: значение, градиент, гессиан.

Производные аналитические; конечные разности служат только
независимым оракулом в тестах.
"""

from abc import ABC, abstractmethod
from typing import Optional, Tuple

import numpy as np

from app.exceptions import DimensionMismatchError, NotPositiveDefiniteError
from app.models.mixed_vector import VectorLike, as_array
from app.schemas.run_config import SensorParams


# Запас, с которым берётся выборочная оценка L
LIPSCHITZ_MARGIN = 1.1


class Objective(ABC):
    """
    Гладкая функция агента f_i: R^{n_c + n_d} -> R.

    Метаданные:
    - `convex`: выпукла ли функция
    - `lipschitz`: аналитическая константа L_i (если известна)
    - `strong_convexity`: μ_i (только справочно, нигде не вычисляется)
    """

    def __init__(
        self,
        n_c: int,
        n_d: int,
        convex: bool,
        lipschitz: Optional[float] = None,
        strong_convexity: Optional[float] = None
    ):
        self.n_c = n_c
        self.n_d = n_d
        self.convex = convex
        self.lipschitz = lipschitz
        self.strong_convexity = strong_convexity

    @property
    def dim(self) -> int:
        return self.n_c + self.n_d

    def _point(self, x: VectorLike) -> np.ndarray:
        arr = as_array(x)
        if arr.shape != (self.dim,):
            raise DimensionMismatchError(
                f"Ожидалась точка размерности {self.dim}, получено {arr.shape}"
            )
        return arr

    @abstractmethod
    def value(self, x: VectorLike) -> float:
        ...

    @abstractmethod
    def gradient(self, x: VectorLike) -> np.ndarray:
        ...

    @abstractmethod
    def hessian(self, x: VectorLike) -> np.ndarray:
        ...


class ConvexSensorObjective(Objective):
    """½‖y - ζ^α‖² + ½‖b - ζ^β‖²; гессиан — единичная матрица."""

    def __init__(self, params: SensorParams):
        self.zeta_alpha = np.asarray(params.zeta_alpha, dtype=np.float64)
        self.zeta_beta = np.asarray(params.zeta_beta, dtype=np.float64)
        self.target = np.concatenate([self.zeta_alpha, self.zeta_beta])
        super().__init__(
            n_c=self.zeta_alpha.size,
            n_d=self.zeta_beta.size,
            convex=True,
            lipschitz=1.0,
            strong_convexity=1.0
        )

    def value(self, x: VectorLike) -> float:
        r = self._point(x) - self.target
        return 0.5 * float(np.dot(r, r))

    def gradient(self, x: VectorLike) -> np.ndarray:
        return self._point(x) - self.target

    def hessian(self, x: VectorLike) -> np.ndarray:
        self._point(x)
        return np.eye(self.dim)


class NonconvexSensorObjective(ConvexSensorObjective):
    """
    Выпуклая часть плюс ½ Σ_j ((y[j] - b[j])² - ζ^γ[j])².

    Глобальной константы L нет: рост четвёртой степени.
    """

    def __init__(self, params: SensorParams):
        if len(params.zeta_alpha) != len(params.zeta_beta):
            raise DimensionMismatchError(
                "Невыпуклая задача требует n_c = n_d",
                {"n_c": len(params.zeta_alpha), "n_d": len(params.zeta_beta)}
            )
        if len(params.zeta_gamma) != len(params.zeta_beta):
            raise DimensionMismatchError("Длина ζ^γ должна быть равна n_d")
        super().__init__(params)
        self.zeta_gamma = np.asarray(params.zeta_gamma, dtype=np.float64)
        self.convex = False
        self.lipschitz = None
        self.strong_convexity = None

    def _residuals(self, arr: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        d = arr[:self.n_c] - arr[self.n_c:]
        return d, d * d - self.zeta_gamma

    def value(self, x: VectorLike) -> float:
        arr = self._point(x)
        _, r = self._residuals(arr)
        return super().value(arr) + 0.5 * float(np.dot(r, r))

    def gradient(self, x: VectorLike) -> np.ndarray:
        arr = self._point(x)
        d, r = self._residuals(arr)
        quartic = 2.0 * r * d
        grad = arr - self.target
        grad[:self.n_c] += quartic
        grad[self.n_c:] -= quartic
        return grad

    def hessian(self, x: VectorLike) -> np.ndarray:
        arr = self._point(x)
        d, r = self._residuals(arr)
        # d²/dd² of ½(d² - ζ)² = 6d² - 2ζ, блок [[h, -h], [-h, h]] по (y_j, b_j)
        h = 4.0 * d * d + 2.0 * r
        hess = np.eye(self.dim)
        idx_c = np.arange(self.n_c)
        idx_d = idx_c + self.n_c
        hess[idx_c, idx_c] += h
        hess[idx_d, idx_d] += h
        hess[idx_c, idx_d] -= h
        hess[idx_d, idx_c] -= h
        return hess


class QuadraticObjective(Objective):
    """½ xᵀQx + cᵀx с SPD матрицей Q."""

    def __init__(self, Q: np.ndarray, c: np.ndarray, n_c: Optional[int] = None):
        Q = np.asarray(Q, dtype=np.float64)
        c = np.asarray(c, dtype=np.float64).ravel()
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] != c.size:
            raise DimensionMismatchError(
                f"Несогласованные размеры Q {Q.shape} и c {c.shape}"
            )
        if not np.allclose(Q, Q.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(Q).max())):
            raise NotPositiveDefiniteError("Матрица Q не симметрична")
        eigenvalues = np.linalg.eigvalsh(Q)
        if eigenvalues[0] <= 0:
            raise NotPositiveDefiniteError(
                "Матрица Q не положительно определена",
                {"min_eigenvalue": float(eigenvalues[0])}
            )
        self.Q = Q
        self.c = c
        n = c.size
        n_c = n if n_c is None else n_c
        super().__init__(
            n_c=n_c,
            n_d=n - n_c,
            convex=True,
            lipschitz=float(eigenvalues[-1]),
            strong_convexity=float(eigenvalues[0])
        )

    def value(self, x: VectorLike) -> float:
        arr = self._point(x)
        return 0.5 * float(arr @ self.Q @ arr) + float(np.dot(self.c, arr))

    def gradient(self, x: VectorLike) -> np.ndarray:
        return self.Q @ self._point(x) + self.c

    def hessian(self, x: VectorLike) -> np.ndarray:
        self._point(x)
        return self.Q.copy()


class ZeroObjective(Objective):
    """Тождественный ноль (вырожденные случаи)."""

    def __init__(self, n_c: int, n_d: int):
        super().__init__(n_c=n_c, n_d=n_d, convex=True, lipschitz=0.0)

    def value(self, x: VectorLike) -> float:
        self._point(x)
        return 0.0

    def gradient(self, x: VectorLike) -> np.ndarray:
        return np.zeros_like(self._point(x))

    def hessian(self, x: VectorLike) -> np.ndarray:
        self._point(x)
        return np.zeros((self.dim, self.dim))


# ========== Фабрики ==========

def convex_sensor_objective(params: SensorParams) -> ConvexSensorObjective:
    return ConvexSensorObjective(params)


def nonconvex_sensor_objective(params: SensorParams) -> NonconvexSensorObjective:
    return NonconvexSensorObjective(params)


def quadratic_objective(Q: np.ndarray, c: np.ndarray, n_c: Optional[int] = None) -> QuadraticObjective:
    return QuadraticObjective(Q, c, n_c)


def zero_objective(n_c: int, n_d: int) -> ZeroObjective:
    return ZeroObjective(n_c, n_d)


def estimate_lipschitz(
    obj: Objective,
    box: Tuple[float, float],
    samples: int,
    seed: int = 0
) -> float:
    """
    Выборочная оценка константы L на кубе.

    Берётся максимум спектральной нормы гессиана по `samples` равномерным
    точкам куба и умножается на 1.1.

    **Параметры:**
    - `obj`: целевая функция
    - `box`: границы (lo, hi) по каждой координате
    - `samples`: число точек, не меньше 2
    - `seed`: seed генератора точек

    **Возвращает:**
    - `float`: оценка L
    """
    if samples < 2:
        raise ValueError("Нужно не менее двух точек выборки")
    lo, hi = box
    rng = np.random.default_rng(seed)
    points = rng.uniform(lo, hi, size=(samples, obj.dim))
    largest = 0.0
    for point in points:
        eigenvalues = np.linalg.eigvalsh(obj.hessian(point))
        largest = max(largest, float(np.max(np.abs(eigenvalues))))
    return LIPSCHITZ_MARGIN * largest
