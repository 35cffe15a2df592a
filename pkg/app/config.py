"""
Настройки процесса.

Читаются из переменных окружения MIXCALADIN_* и файла .env.
Параметры алгоритма сюда не входят — они живут в RunConfig.
"""

from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Настройки окружения.

    Пример .env:
        MIXCALADIN_LOG_LEVEL=DEBUG
        MIXCALADIN_MAX_WORKERS=4
    """

    model_config = SettingsConfigDict(
        env_prefix="MIXCALADIN_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    log_level: str = Field(
        "INFO",
        description="Уровень логирования"
    )

    output_dir: Path = Field(
        Path("results"),
        description="Каталог результатов по умолчанию"
    )

    max_workers: int = Field(
        1,
        ge=1,
        description="Потоков для параллельной работы агентов (1 — без пула)"
    )

    lipschitz_box: float = Field(
        3.0,
        gt=0,
        description="Полуширина куба [-b, b]^n для оценки L невыпуклой задачи"
    )

    lipschitz_samples: int = Field(
        64,
        ge=2,
        description="Число точек выборки при оценке L"
    )


@lru_cache
def get_settings() -> Settings:
    """Возвращает закэшированный экземпляр настроек."""
    return Settings()
