import numpy as np
import pytest

from app.config import get_settings
from app.schemas.run_config import ProblemKind, RunConfig, default_config
from app.services.experiment import generate_instance


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch, tmp_path):
    """Настройки без внешнего окружения; результаты по умолчанию во временный каталог."""
    monkeypatch.setenv("MIXCALADIN_OUTPUT_DIR", str(tmp_path / "results"))
    monkeypatch.delenv("MIXCALADIN_MAX_WORKERS", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def convex_config() -> RunConfig:
    return default_config(ProblemKind.CONVEX)


@pytest.fixture
def nonconvex_config() -> RunConfig:
    return default_config(ProblemKind.NONCONVEX)


@pytest.fixture
def small_convex_config(convex_config) -> RunConfig:
    return RunConfig.model_validate({**convex_config.model_dump(), "num_agents": 5, "n_c": 3, "n_d": 4})


@pytest.fixture
def convex_problem(convex_config):
    return generate_instance(convex_config)


@pytest.fixture
def small_convex_problem(small_convex_config):
    return generate_instance(small_convex_config)


@pytest.fixture
def nonconvex_problem(nonconvex_config):
    return generate_instance(nonconvex_config)
