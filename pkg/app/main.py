"""
Главный файл командной строки Mix-CALADIN.

Подкоманды:
- run: полный прогон (стадия I + стадия II, при --baseline ещё ADMM)
- compare: сравнение с ADMM по нескольким seed
- audit: линейная сходимость стадии I

Коды завершения: 0 — успех, 1 — нарушение инварианта или сбой
алгоритма, 2 — некорректная конфигурация.
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.commands import audit_command, compare_command, run_command
from app.commands.options import add_run_options
from app.config import get_settings
from app.exceptions import MaxOuterExceededError, MixCaladinError
from app.services.experiment import AUDIT_FIT_END, AUDIT_FIT_START, AUDIT_HORIZON


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID_CONFIG = 2

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixcaladin",
        description="Mix-CALADIN: распределённая смешанно-целочисленная оптимизация консенсуса"
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR")
    sub = parser.add_subparsers(dest="cmd", required=True)

    pr = sub.add_parser("run", help="Один полный прогон")
    add_run_options(pr)
    pr.add_argument("--baseline", action="store_true", default=None, help="Сравнить с ADMM")
    pr.set_defaults(func=run_command)

    pc = sub.add_parser("compare", help="Сравнение с ADMM по нескольким seed")
    add_run_options(pc)
    pc.add_argument("--seeds", type=int, default=10, help="Число seed начиная с --seed")
    pc.set_defaults(func=compare_command)

    pa = sub.add_parser("audit", help="Аудит линейной сходимости стадии I")
    add_run_options(pa)
    pa.add_argument("--seeds", type=int, default=5, help="Число seed начиная с --seed")
    pa.add_argument("--horizon", type=int, default=AUDIT_HORIZON, help="Итераций в кривой невязки")
    pa.add_argument("--fit-start", type=int, default=AUDIT_FIT_START)
    pa.add_argument("--fit-end", type=int, default=AUDIT_FIT_END)
    pa.set_defaults(func=audit_command)

    return parser


def setup_logging(level: Optional[str] = None) -> None:
    """Настройка логирования: уровень из флага или из настроек окружения."""
    logging.basicConfig(
        level=(level or get_settings().log_level).upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        force=True
    )


def main(argv: Optional[List[str]] = None) -> int:
    """
    Точка входа.

    **Возвращает:**
    - код завершения процесса
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)

    try:
        return args.func(args)
    except MaxOuterExceededError as e:
        logger.error(f"❌ {e} (лучшее γ = {e.best_gamma:.3e})")
        return EXIT_FAILURE
    except MixCaladinError as e:
        # доменные ошибки тоже ValueError, поэтому ловятся первыми
        logger.error(f"❌ Ошибка алгоритма: {e}")
        return EXIT_FAILURE
    except (ValidationError, ValueError, FileNotFoundError) as e:
        logger.error(f"❌ Некорректная конфигурация: {e}")
        return EXIT_INVALID_CONFIG


if __name__ == "__main__":
    sys.exit(main())
