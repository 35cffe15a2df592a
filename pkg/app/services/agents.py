"""
Параллельное выполнение работы агентов.

Порядок результатов всегда совпадает с порядком агентов, поэтому
итог не зависит от планирования потоков.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

from app.config import get_settings


T = TypeVar("T")
R = TypeVar("R")


def map_agents(work: Callable[[int, T], R], items: Sequence[T], max_workers: Optional[int] = None) -> List[R]:
    """
    Применяет work(index, item) ко всем агентам.

    `max_workers` по умолчанию берётся из настроек; 1 — без пула потоков.
    """
    workers = max_workers or get_settings().max_workers
    if workers <= 1 or len(items) <= 1:
        return [work(index, item) for index, item in enumerate(items)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(work, range(len(items)), items))
