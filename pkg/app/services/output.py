"""
Запись результатов прогона в плоские файлы.

trace.csv: stage,iter,step_norm,objective,gamma,alpha,energy — по строке
на итерацию, числа через repr (кратчайшее точное представление double),
energy пуст в строках стадии I и ADMM.
"""

import csv
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

from pydantic import BaseModel

from app.models.trace import TraceRecord


logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["stage", "iter", "step_norm", "objective", "gamma", "alpha", "energy"]


def _format_float(value: float) -> str:
    return repr(float(value))


def trace_row(record: TraceRecord) -> Dict[str, str]:
    """Строка CSV для одной записи трассы."""
    return {
        "stage": record.stage.value,
        "iter": str(record.iter),
        "step_norm": _format_float(record.step_norm),
        "objective": _format_float(record.objective),
        "gamma": _format_float(record.gamma),
        "alpha": _format_float(record.alpha),
        "energy": "" if record.energy is None else _format_float(record.energy)
    }


def write_trace_csv(path: Path, records: Iterable[TraceRecord]) -> int:
    """
    Пишет трассу в CSV.

    **Возвращает:**
    - `int`: число записанных строк (без заголовка)
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=TRACE_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow(trace_row(record))
            count += 1
    logger.debug("Записано %d строк в %s", count, path)
    return count


def write_residuals_csv(path: Path, curves: Sequence[Tuple[int, List[float]]]) -> None:
    """residuals.csv: seed,iter,residual — ‖z^{[k]} - z̃*‖² по итерациям."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=["seed", "iter", "residual"], lineterminator="\n")
        writer.writeheader()
        for seed, residuals in curves:
            for iteration, residual in enumerate(residuals, start=1):
                writer.writerow({"seed": seed, "iter": iteration, "residual": _format_float(residual)})


def write_json(path: Path, model: BaseModel) -> None:
    """Сохраняет pydantic-модель в JSON с отступами."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")


def read_trace_csv(path: Path) -> List[Dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))
