"""
Смешанный вектор: непрерывный блок + релаксированный булев блок.

Оба блока хранятся одним непрерывным массивом с индексом разбиения n_c,
поэтому матричная алгебра координатора работает с ним как с обычным
вектором, а блоки различаются только в штрафе и ограничении-ящике.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from app.exceptions import DimensionMismatchError, DomainError


# Допуск на выход булева блока за [0, 1] при проверке допустимости
BOX_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class MixedVector:
    """
    Точка x = [y; b] размерности n_c + n_d.

    Неизменяемая: массив копируется и помечается read-only.

    Пример:
        z = MixedVector.from_blocks(np.zeros(10), np.full(10, 0.5))
        z.disc  # релаксированный булев блок
    """

    data: np.ndarray
    n_c: int

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.ndim != 1:
            raise DimensionMismatchError(
                f"Ожидался одномерный массив, получено ndim={data.ndim}"
            )
        if not 0 <= self.n_c <= data.size:
            raise DimensionMismatchError(
                f"Индекс разбиения n_c={self.n_c} вне [0, {data.size}]"
            )
        if not np.all(np.isfinite(data)):
            raise DomainError("Смешанный вектор содержит NaN/Inf")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    # ========== Конструкторы ==========

    @classmethod
    def from_blocks(cls, cont, disc) -> "MixedVector":
        cont = np.asarray(cont, dtype=np.float64).ravel()
        disc = np.asarray(disc, dtype=np.float64).ravel()
        return cls(np.concatenate([cont, disc]), cont.size)

    @classmethod
    def zeros(cls, n_c: int, n_d: int) -> "MixedVector":
        return cls(np.zeros(n_c + n_d), n_c)

    def with_data(self, data: np.ndarray) -> "MixedVector":
        """Новый вектор с тем же разбиением."""
        if np.shape(data) != self.data.shape:
            raise DimensionMismatchError(
                f"Размерность {np.shape(data)} не совпадает с {self.data.shape}"
            )
        return MixedVector(data, self.n_c)

    # ========== Блоки и размеры ==========

    @property
    def n_d(self) -> int:
        return self.data.size - self.n_c

    @property
    def dim(self) -> int:
        return self.data.size

    @property
    def cont(self) -> np.ndarray:
        return self.data[:self.n_c]

    @property
    def disc(self) -> np.ndarray:
        return self.data[self.n_c:]

    # ========== Операции над булевым блоком ==========

    def clamp_disc(self) -> "MixedVector":
        """Проекция булева блока на [0, 1]."""
        data = self.data.copy()
        data[self.n_c:] = np.clip(data[self.n_c:], 0.0, 1.0)
        return MixedVector(data, self.n_c)

    def round_disc(self) -> "MixedVector":
        """
        Округление булева блока до {0, 1}.

        Ничья ровно в 0.5 уходит в 0.
        """
        data = self.data.copy()
        data[self.n_c:] = np.where(data[self.n_c:] > 0.5, 1.0, 0.0)
        return MixedVector(data, self.n_c)

    def __repr__(self) -> str:
        return f"MixedVector(n_c={self.n_c}, n_d={self.n_d}, data={self.data!r})"


VectorLike = Union[MixedVector, np.ndarray]


def as_array(x: VectorLike) -> np.ndarray:
    """Возвращает ndarray для MixedVector или массива."""
    if isinstance(x, MixedVector):
        return x.data
    return np.asarray(x, dtype=np.float64)


def gamma(z: MixedVector) -> float:
    """
    Мера булевой недопустимости γ = (1 - z_d)ᵀ z_d.

    Считается без отсечения: для z_d вне [0, 1] может быть отрицательной.
    """
    disc = z.disc
    return float(np.dot(1.0 - disc, disc))


def is_boolean_feasible(z: MixedVector, eps_outer: float) -> bool:
    """
    Проверка γ(z) < eps_outer.

    **Ошибки:**
    - `DomainError`, если булев блок выходит за [-1e-9, 1 + 1e-9]
    """
    disc = z.disc
    if np.any(disc < -BOX_SLACK) or np.any(disc > 1.0 + BOX_SLACK):
        raise DomainError(
            "Булев блок вне [0, 1]",
            {"min": float(disc.min()), "max": float(disc.max())}
        )
    return gamma(z) < eps_outer
