"""
Подкоманда audit: линейная сходимость стадии I по нескольким seed.
"""

import argparse
import logging
from pathlib import Path

from app.commands.options import resolve_config
from app.services.experiment import audit_stage1
from app.services.output import write_json, write_residuals_csv


logger = logging.getLogger(__name__)


def audit_command(args: argparse.Namespace) -> int:
    """
    Пишет residuals.csv и audit.json.

    **Возвращает:**
    - 0, если на всех seed наклон отрицателен и R² не ниже порога, иначе 1
    """
    config = resolve_config(args)
    seeds = [config.seed + offset for offset in range(args.seeds)]
    report, curves = audit_stage1(
        config,
        seeds,
        horizon=args.horizon,
        fit_start=args.fit_start,
        fit_end=args.fit_end,
        max_workers=args.workers
    )

    out_dir = Path(config.output_path)
    write_residuals_csv(out_dir / "residuals.csv", curves)
    write_json(out_dir / "audit.json", report)

    print(f"Средний наклон {report.mean_slope:.4f}, минимальный R² {report.min_r_squared:.4f}")
    if not report.linear:
        logger.error("Линейная сходимость стадии I не подтверждена")
        return 1
    return 0
