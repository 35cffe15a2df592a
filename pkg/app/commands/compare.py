"""
Подкоманда compare: Mix-CALADIN против ADMM с проекцией по нескольким seed.
"""

import argparse
import logging
from pathlib import Path

from app.commands.options import resolve_config
from app.services.experiment import compare_seeds
from app.services.output import write_json


logger = logging.getLogger(__name__)


def compare_command(args: argparse.Namespace) -> int:
    """
    Сравнение на seed, seed + 1, ..., seed + n - 1.

    **Возвращает:**
    - 0, если все прогоны без нарушений инвариантов, иначе 1
    """
    config = resolve_config(args)
    seeds = [config.seed + offset for offset in range(args.seeds)]
    compare, reports = compare_seeds(config, seeds, max_workers=args.workers)
    write_json(Path(config.output_path) / "compare.json", compare)

    for seed, caladin, admm in zip(seeds, compare.caladin_objectives, compare.admm_objectives):
        print(f"seed {seed}: Mix-CALADIN {caladin:.6g}, ADMM {admm:.6g}")
    print(f"Не хуже ADMM: {compare.wins} из {len(seeds)}")
    return 0 if all(report.ok for report in reports) else 1
