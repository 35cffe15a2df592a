"""
Pydantic схемы конфигурации и отчётов.

Используются для входных JSON-конфигураций и выходных summary/audit.
"""

from app.schemas.params import AlgoParams, NewtonSettings
from app.schemas.run_config import (
    InstanceRecord,
    ProblemKind,
    QuadraticParams,
    RunConfig,
    SensorParams,
    default_config,
    load_config,
)
from app.schemas.summary import AuditReport, CompareReport, ComparisonBlock, RunSummary

__all__ = [
    "AlgoParams",
    "NewtonSettings",
    "InstanceRecord",
    "ProblemKind",
    "QuadraticParams",
    "RunConfig",
    "SensorParams",
    "default_config",
    "load_config",
    "AuditReport",
    "CompareReport",
    "ComparisonBlock",
    "RunSummary"
]
