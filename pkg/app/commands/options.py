"""
Общие опции подкоманд и сборка итоговой конфигурации.

Приоритет: значения по умолчанию для вида задачи < файл --config < флаги.
"""

import argparse
from pathlib import Path
from typing import Any, Dict, Optional

from app.config import get_settings
from app.schemas.run_config import ProblemKind, RunConfig, default_config, load_config


# флаг CLI -> поле AlgoParams
PARAM_FLAGS = {
    "rho1": "rho1",
    "rho2": "rho2",
    "alpha0": "alpha0",
    "beta": "beta",
    "eps_stage1": "eps_stage1",
    "eps_inner": "eps_inner",
    "eps_outer": "eps_outer",
    "max_iter": "max_iter_stage1",
    "max_iter_inner": "max_iter_inner",
    "max_outer": "max_outer",
}


def add_run_options(parser: argparse.ArgumentParser) -> None:
    """Флаги, общие для run / compare / audit."""
    parser.add_argument("--config", type=Path, default=None, help="JSON-файл RunConfig")
    parser.add_argument("--problem", choices=[kind.value for kind in ProblemKind], default=None)
    parser.add_argument("--agents", type=int, default=None, help="Число агентов N")
    parser.add_argument("--nc", type=int, default=None, help="Размер непрерывного блока")
    parser.add_argument("--nd", type=int, default=None, help="Размер булева блока")
    parser.add_argument("--rho1", type=float, default=None)
    parser.add_argument("--rho2", type=float, default=None)
    parser.add_argument("--alpha0", type=float, default=None)
    parser.add_argument("--beta", type=float, default=None)
    parser.add_argument("--eps-stage1", type=float, default=None)
    parser.add_argument("--eps-inner", type=float, default=None)
    parser.add_argument("--eps-outer", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--max-iter", type=int, default=None, help="Лимит итераций стадии I")
    parser.add_argument("--max-iter-inner", type=int, default=None, help="Лимит одного внутреннего цикла")
    parser.add_argument("--max-outer", type=int, default=None, help="Лимит увеличений α")
    parser.add_argument("--accelerated", action="store_true", default=None, help="Координатор с гессианами")
    parser.add_argument("--exact-penalty", action="store_true", default=None, help="Экспериментальный точный штраф")
    parser.add_argument("--random-init", action="store_true", default=None, help="Случайные z⁰, λ⁰")
    parser.add_argument("--coordinator", choices=["general", "convex"], default=None)
    parser.add_argument("--workers", type=int, default=None, help="Потоков для агентов")
    parser.add_argument("--out", type=Path, default=None, help="Каталог результатов")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """
    Собирает RunConfig из аргументов командной строки.

    **Ошибки:**
    - `pydantic.ValidationError` для некорректной итоговой конфигурации
    - `FileNotFoundError`, если --config не существует
    """
    if args.config is not None:
        base = load_config(args.config)
    else:
        base = default_config(ProblemKind(args.problem or ProblemKind.CONVEX.value))

    data: Dict[str, Any] = base.model_dump()
    top_level = {
        "problem_kind": args.problem,
        "num_agents": args.agents,
        "n_c": args.nc,
        "n_d": args.nd,
        "seed": args.seed,
        "baseline": getattr(args, "baseline", None),
    }
    data.update({key: value for key, value in top_level.items() if value is not None})

    params = data["params"]
    for flag, field_name in PARAM_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            params[field_name] = value
    for flag in ("accelerated", "exact_penalty", "random_init"):
        if getattr(args, flag):
            params[flag] = True
    if args.coordinator is not None:
        params["convex_coordinator"] = args.coordinator == "convex"

    data["output_path"] = output_dir(args, data.get("output_path"))
    return RunConfig.model_validate(data)


def output_dir(args: argparse.Namespace, configured: Optional[Path]) -> Path:
    """Каталог результатов: --out, затем файл конфигурации, затем настройки."""
    if args.out is not None:
        return args.out
    if configured is not None:
        return Path(configured)
    return get_settings().output_dir
