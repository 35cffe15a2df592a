"""
Модели предметной области.
"""

from app.models.mixed_vector import MixedVector, gamma, is_boolean_feasible, as_array
from app.models.problem import ProblemInstance, AgentState
from app.models.trace import Stage, TraceRecord

__all__ = [
    "MixedVector",
    "gamma",
    "is_boolean_feasible",
    "as_array",
    "ProblemInstance",
    "AgentState",
    "Stage",
    "TraceRecord"
]
