"""
Конфигурация pytest и общие фикстуры для тестов.
"""

import logging
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from implicit_pf.config import RunConfig, parse_run_config
from implicit_pf.core.model import StateSpaceModel
from implicit_pf.systems import iid_gaussian_model, linear_gaussian_model, plankton_model
from implicit_pf.systems.plankton import PlanktonParams


@pytest.fixture(autouse=True)
def _quiet_package_logger():
    """Логгер пакета пишет в caplog, а не в RichHandler предыдущего вызова CLI."""
    package_logger = logging.getLogger("implicit_pf")
    handlers = list(package_logger.handlers)
    propagate = package_logger.propagate
    yield
    package_logger.handlers = handlers
    package_logger.propagate = propagate


@pytest.fixture
def rng() -> np.random.Generator:
    """Генератор с фиксированным сидом для тестовых данных."""
    return np.random.default_rng(12345)


@pytest.fixture
def scalar_model() -> StateSpaceModel:
    """Скалярная модель F(x) = -x, G = 1, delta = 0.1, h = id, Q = 1."""
    return linear_gaussian_model([[-1.0]], [1.0], [[1.0]], [1.0], delta=0.1, name="scalar")


@pytest.fixture
def iid_model() -> StateSpaceModel:
    """Модель с независимыми гауссовыми компонентами, d = 3."""
    return iid_gaussian_model(3)


@pytest.fixture
def cubic_model() -> StateSpaceModel:
    """Нелинейная скалярная модель: h(x) = x + x^3 / 10, F(x) = -x / 2."""
    return StateSpaceModel(
        name="cubic",
        dim_state=1,
        dim_obs=1,
        delta=0.5,
        drift_fn=lambda x, t: -0.5 * x,
        diffusion_fn=lambda x, t: np.ones(1),
        obs_fn=lambda x: x + x**3 / 10.0,
        obs_jacobian_fn=lambda x: np.array([[1.0 + 0.3 * x[0] ** 2]]),
        obs_noise=np.array([0.5]),
    )


@pytest.fixture
def plankton_params() -> PlanktonParams:
    return PlanktonParams()


@pytest.fixture
def npzd_model(plankton_params: PlanktonParams) -> StateSpaceModel:
    return plankton_model(plankton_params)


@pytest.fixture
def linear_config() -> RunConfig:
    """Небольшой запуск на скалярной линейной модели с наблюдениями через шаг."""
    return parse_run_config(
        {
            "filter": "implicit",
            "filters": ["implicit", "sir"],
            "particles": 20,
            "steps": 6,
            "seed": 7,
            "model": {
                "kind": "linear",
                "linear": {
                    "drift_matrix": [[-0.2]],
                    "diffusion": [1.0],
                    "obs_matrix": [[1.0]],
                    "obs_noise": [0.5],
                    "delta": 1.0,
                },
            },
            "observations": {"every": 2},
        }
    )


@pytest.fixture
def plankton_config() -> RunConfig:
    """Короткий запуск NPZD с еженедельными наблюдениями."""
    return parse_run_config(
        {
            "filter": "implicit",
            "filters": ["implicit", "sir"],
            "particles": 10,
            "steps": 14,
            "seed": 3,
            "model": {"kind": "plankton"},
            "observations": {"every": 7},
            "iteration": {"warm_start": True},
        }
    )


@pytest.fixture
def cli_runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    """TOML файл для тестов командной строки."""
    path = tmp_path / "run.toml"
    path.write_text(
        "\n".join(
            [
                'filter = "implicit"',
                'filters = ["implicit", "sir"]',
                "particles = 8",
                "steps = 4",
                "seed = 1",
                "",
                "[model]",
                'kind = "linear"',
                "",
                "[model.linear]",
                "drift_matrix = [[-0.1]]",
                "diffusion = [1.0]",
                "obs_matrix = [[1.0]]",
                "obs_noise = [1.0]",
                "",
                "[observations]",
                "every = 1",
            ]
        )
        + "\n",
        encoding="utf-8",
    )
    return path
