"""
Записи трассы итераций.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from app.models.mixed_vector import MixedVector


# Метка стадии для строки трассы
class Stage(str, Enum):
    STAGE1 = "Stage1"
    STAGE2_INNER = "Stage2Inner"
    STAGE2_OUTER_BUMP = "Stage2OuterBump"
    BASELINE = "Baseline"


@dataclass(frozen=True)
class TraceRecord:
    """
    Одна строка трассы.

    - `step_norm`: ‖z^{[k+1]} - z^{[k]}‖ (0 для строк увеличения α)
    - `objective`: Σ f_i(z)
    - `gamma`: (1 - z_d)ᵀ z_d
    - `energy`: E(z) = Σ f_i(z) + αγ, только для Stage II
    """

    stage: Stage
    iter: int
    z: MixedVector
    step_norm: float
    objective: float
    gamma: float
    alpha: float
    energy: Optional[float] = None
