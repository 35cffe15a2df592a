"""
Подкоманда run: один полный прогон Mix-CALADIN.
"""

import argparse
import logging

from app.commands.options import resolve_config
from app.services.experiment import run_experiment


logger = logging.getLogger(__name__)


def run_command(args: argparse.Namespace) -> int:
    """
    Прогон по конфигурации из аргументов.

    **Возвращает:**
    - 0 при успехе, 1 при нарушении обязательного инварианта
    """
    config = resolve_config(args)
    report = run_experiment(config, max_workers=args.workers)
    summary = report.summary

    print(
        f"{summary.problem_kind.value}: f = {summary.final_objective:.6g} "
        f"(нижняя оценка {summary.relaxed_objective:.6g}), γ = {summary.final_gamma:.3e}, "
        f"итераций {summary.stage1_iterations} + {summary.stage2_inner_iterations}, "
        f"увеличений α {summary.outer_bumps}"
    )
    if summary.comparison is not None:
        print(f"ADMM: f = {summary.comparison.admm_objective:.6g}")
    print(f"Результаты: {config.output_path}")
    return 0 if report.ok else 1
