"""
Подкоманды командной строки.

Каждая принимает argparse.Namespace и возвращает код завершения.
"""

from app.commands.audit import audit_command
from app.commands.compare import compare_command
from app.commands.run import run_command

__all__ = [
    "run_command",
    "compare_command",
    "audit_command"
]
