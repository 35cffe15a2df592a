"""
Экземпляр задачи консенсуса и состояние агента.
"""

from dataclasses import dataclass, field
from typing import List, Optional, TYPE_CHECKING

import numpy as np

from app.exceptions import DimensionMismatchError, NotPositiveDefiniteError
from app.models.mixed_vector import MixedVector, VectorLike, as_array

if TYPE_CHECKING:
    from app.services.objectives import Objective


# Допуск симметрии гессиана агента
SYMMETRY_TOL = 1e-12


@dataclass
class ProblemInstance:
    """
    min Σ f_i(x_i) при x_i = z, i = 1..N.

    `lipschitz_bound` — известная (или оценённая) общая константа L.
    """

    num_agents: int
    n_c: int
    n_d: int
    objectives: List["Objective"]
    lipschitz_bound: Optional[float] = None
    kind: str = "custom"

    def __post_init__(self):
        if self.num_agents < 1:
            raise DimensionMismatchError("Нужен хотя бы один агент")
        if len(self.objectives) != self.num_agents:
            raise DimensionMismatchError(
                f"Ожидалось {self.num_agents} функций, получено {len(self.objectives)}"
            )
        for index, objective in enumerate(self.objectives):
            if objective.dim != self.dim:
                raise DimensionMismatchError(
                    f"Функция агента размерности {objective.dim} вместо {self.dim}",
                    {"agent": index}
                )

    @property
    def dim(self) -> int:
        return self.n_c + self.n_d

    @property
    def convex(self) -> bool:
        return all(objective.convex for objective in self.objectives)

    def total_objective(self, z: VectorLike) -> float:
        """Σ f_i(z) в фиксированном порядке агентов."""
        point = as_array(z)
        return float(sum(objective.value(point) for objective in self.objectives))

    def zeros(self) -> MixedVector:
        return MixedVector.zeros(self.n_c, self.n_d)


@dataclass
class AgentState:
    """
    Локальные переменные агента i: x_i, λ_i, g_i, H_i.

    `sigma` — минимальное собственное значение исходного ∇²f_i
    (до регуляризации).
    """

    x: MixedVector
    lam: np.ndarray
    grad: Optional[np.ndarray] = None
    hess: Optional[np.ndarray] = None
    sigma: Optional[float] = field(default=None)

    def update_gradient(self, grad: np.ndarray) -> None:
        if grad.shape != (self.x.dim,):
            raise DimensionMismatchError("Размер g_i не совпадает с x_i")
        self.grad = grad

    def update_curvature(self, grad: np.ndarray, hess: np.ndarray, sigma: Optional[float] = None) -> None:
        """
        Записывает градиент и (регуляризованный) гессиан.

        **Ошибки:**
        - `NotPositiveDefiniteError`, если гессиан не симметричен или не SPD
        """
        if hess.shape != (self.x.dim, self.x.dim) or grad.shape != (self.x.dim,):
            raise DimensionMismatchError("Размеры g_i / H_i не совпадают с x_i")
        if np.max(np.abs(hess - hess.T)) > SYMMETRY_TOL * max(1.0, np.abs(hess).max()):
            raise NotPositiveDefiniteError("Гессиан агента не симметричен")
        if np.linalg.eigvalsh(hess)[0] <= 0:
            raise NotPositiveDefiniteError("Гессиан агента не положительно определён")
        self.grad = grad
        self.hess = hess
        self.sigma = sigma
