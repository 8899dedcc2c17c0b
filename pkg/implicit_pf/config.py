"""
Конфигурационные параметры запуска фильтров.

RuntimeSettings читаются из переменных окружения (префикс IMPLICIT_PF_) или .env файла,
RunConfig - из TOML файла эксперимента.
"""

import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .core.enums import FilterKind, ModelKind
from .core.exceptions import ConfigError
from .services.implicit_sampling import IterationConfig
from .services.resampling import ResamplePolicy
from .systems.plankton import PlanktonParams


if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


logger = logging.getLogger(__name__)


class RuntimeSettings(BaseSettings):
    """
    Настройки окружения.
    Читаются из переменных окружения или .env файла.

    Attributes:
        workers: Число рабочих потоков для цикла по частицам
        log_level: Уровень логирования
        output_dir: Каталог результатов по умолчанию
    """

    workers: int = Field(1, ge=1)
    log_level: str = "INFO"
    output_dir: Path = Path("output")

    model_config = SettingsConfigDict(
        env_prefix="IMPLICIT_PF_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


class LinearModelConfig(BaseModel):
    """
    Линейно-гауссова модель: явные матрицы или случайная устойчивая система.

    Attributes:
        drift_matrix: A
        diffusion: Диагональ G
        obs_matrix: H
        obs_noise: Диагональ Q
        delta: Шаг по времени
        random_state_dims: Если задано, матрицы генерируются случайно с этой размерностью состояния
        random_obs_dims: Размерность наблюдения случайной модели
        random_seed: Сид случайной модели
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    drift_matrix: List[List[float]] = [[-0.1]]
    diffusion: List[float] = [1.0]
    obs_matrix: List[List[float]] = [[1.0]]
    obs_noise: List[float] = [1.0]
    delta: float = Field(1.0, gt=0)
    random_state_dims: Optional[int] = Field(None, ge=1)
    random_obs_dims: Optional[int] = Field(None, ge=1)
    random_seed: int = 0


class ModelConfig(BaseModel):
    """
    Выбор и параметры модели.

    Attributes:
        kind: plankton | iid_gaussian | linear
        dims: Размерность iid_gaussian модели
        plankton: Параметры NPZD
        linear: Параметры линейной модели
        x0: Начальное состояние (по умолчанию начальные значения NPZD или ноль)
        init_std: Разброс начального ансамбля вокруг x0
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ModelKind = ModelKind.LINEAR
    dims: int = Field(1, ge=1)
    plankton: PlanktonParams = PlanktonParams()
    linear: LinearModelConfig = LinearModelConfig()
    x0: Optional[List[float]] = None
    init_std: float = Field(0.0, ge=0)


class ObservationConfig(BaseModel):
    """
    Расписание наблюдений двойного эксперимента.

    Attributes:
        every: Период наблюдений в шагах (если times не задан)
        times: Явный список моментов наблюдений
        truth_seed: Сид истинной траектории (по умолчанию совпадает с seed запуска)
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    every: int = Field(1, ge=1)
    times: Optional[List[int]] = None
    truth_seed: Optional[int] = None

    @field_validator("times")
    @classmethod
    def _check_times(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        if value is not None and any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("times должны строго возрастать")
        return value

    def schedule(self, steps: int) -> List[int]:
        """Моменты наблюдений в пределах [1, steps]."""
        if self.times is not None:
            return [t for t in self.times if 1 <= t <= steps]
        return list(range(self.every, steps + 1, self.every))


class RunConfig(BaseModel):
    """
    Полная конфигурация запуска.

    Attributes:
        filter: Фильтр одиночного запуска
        filters: Фильтры для сравнения (команда compare)
        particles: Число частиц M
        steps: Число шагов
        seed: Мастер-сид
        workers: Число рабочих потоков (None - из RuntimeSettings)
        output_dir: Каталог результатов (None - из RuntimeSettings)
        backward_depth: Глубина обратного прохода для implicit_backward
        model: Модель
        observations: Расписание наблюдений
        resample: Политика ресэмплинга
        iteration: Параметры итерации неявного шага
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    filter: FilterKind = FilterKind.IMPLICIT
    filters: List[FilterKind] = []
    particles: int = Field(100, ge=1)
    steps: int = Field(100, ge=0)
    seed: int = Field(0, ge=0)
    workers: Optional[int] = Field(None, ge=1)
    output_dir: Optional[Path] = None
    backward_depth: int = Field(1, ge=1)
    model: ModelConfig = ModelConfig()
    observations: ObservationConfig = ObservationConfig()
    resample: ResamplePolicy = ResamplePolicy()
    iteration: IterationConfig = IterationConfig()

    @model_validator(mode="after")
    def _check_filters(self) -> "RunConfig":
        if len(set(self.filters)) != len(self.filters):
            raise ValueError("filters не должны повторяться")
        return self

    @property
    def truth_seed(self) -> int:
        if self.observations.truth_seed is not None:
            return self.observations.truth_seed
        return self.seed


def _load_toml(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except OSError as e:
        raise ConfigError(f"Не удалось прочитать конфигурацию {path}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Ошибка синтаксиса TOML в {path}: {e}") from e


def parse_run_config(data: Dict[str, Any]) -> RunConfig:
    """
    Валидирует словарь конфигурации.

    Raises:
        ConfigError: Если конфигурация не проходит валидацию
    """
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Некорректная конфигурация: {e}") from e


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """
    Загружает RunConfig из TOML файла.

    Raises:
        ConfigError: Если файл не читается или не проходит валидацию
    """
    path = Path(path)
    cfg = parse_run_config(_load_toml(path))
    logger.debug(f"Загружена конфигурация {path}: filter={cfg.filter.value}, M={cfg.particles}")
    return cfg


def apply_overrides(cfg: RunConfig, **overrides: Any) -> RunConfig:
    """
    Применяет переопределения из командной строки (значения None пропускаются).

    Словарь для вложенной секции (observations, iteration, resample, model) сливается с ее
    текущими значениями, а не заменяет секцию целиком. Результат проходит повторную валидацию.

    Raises:
        ConfigError: Если переопределения нарушают ограничения
    """
    update = {key: value for key, value in overrides.items() if value is not None}
    if not update:
        return cfg
    data = cfg.model_dump()
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value
    return parse_run_config(data)
