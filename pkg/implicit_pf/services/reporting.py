"""
Запись результатов: CSV таблицы (pandas) и JSON сводки (pydantic).

Формат CSV фиксирован: заголовок строится из имен компонент модели, числа пишутся
в формате %.17g независимо от локали, отсутствующие значения - пустые ячейки.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from .driver import RunMetrics, StepMetrics


logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
HISTOGRAM_EDGES = np.linspace(0.0, 1.0, 21)

TRAJECTORY_FILE = "trajectory.csv"
METRICS_FILE = "metrics.csv"
SUMMARY_FILE = "summary.json"
MAXWEIGHTS_FILE = "maxweights.csv"
HISTOGRAM_FILE = "histogram.csv"


@dataclass
class OutputRow:
    """
    Строка результатов одного шага.

    Attributes:
        step: Индекс шага
        time: Физическое время
        filter: Имя фильтра
        kind: Вид хода
        mean, std: Взвешенные среднее и отклонение по компонентам
        truth: Истина (двойной эксперимент)
        observation: Наблюдение, если есть
        distinct_count: Различные предки после ресэмплинга
        resampled: Был ли ресэмплинг
        max_weight: Максимальный нормированный вес
        ess: Эффективный размер выборки
        iters_mean: Среднее число итераций
    """

    step: int
    time: float
    filter: str
    kind: str
    mean: np.ndarray
    std: np.ndarray
    truth: Optional[np.ndarray]
    observation: Optional[np.ndarray]
    distinct_count: int
    resampled: bool
    max_weight: float
    ess: float
    iters_mean: float

    @classmethod
    def from_step(cls, filter_name: str, row: StepMetrics) -> "OutputRow":
        return cls(
            step=row.step,
            time=row.time,
            filter=filter_name,
            kind=row.kind,
            mean=row.mean,
            std=row.std,
            truth=row.truth,
            observation=row.observation,
            distinct_count=row.distinct,
            resampled=row.resampled,
            max_weight=row.max_weight,
            ess=row.ess,
            iters_mean=row.iters_mean,
        )

    def trajectory_record(self, components: Sequence[str], dim_obs: int) -> Dict[str, Any]:
        record: Dict[str, Any] = {"step": self.step, "time": self.time, "filter": self.filter, "kind": self.kind}
        record.update({f"mean_{c}": v for c, v in zip(components, self.mean)})
        record.update({f"std_{c}": v for c, v in zip(components, self.std)})
        truth = self.truth if self.truth is not None else [np.nan] * len(components)
        record.update({f"truth_{c}": v for c, v in zip(components, truth)})
        obs = self.observation if self.observation is not None else [np.nan] * dim_obs
        record.update({f"obs_{j}": v for j, v in enumerate(obs)})
        return record

    def metrics_record(self) -> Dict[str, Any]:
        return {
            "step": self.step,
            "filter": self.filter,
            "distinct_count": self.distinct_count,
            "resampled": int(self.resampled),
            "max_weight": self.max_weight,
            "ess": self.ess,
            "iters_mean": self.iters_mean,
        }


def trajectory_columns(components: Sequence[str], dim_obs: int) -> List[str]:
    """Заголовок trajectory.csv."""
    return (
        ["step", "time", "filter", "kind"]
        + [f"mean_{c}" for c in components]
        + [f"std_{c}" for c in components]
        + [f"truth_{c}" for c in components]
        + [f"obs_{j}" for j in range(dim_obs)]
    )


METRICS_COLUMNS = ["step", "filter", "distinct_count", "resampled", "max_weight", "ess", "iters_mean"]


def output_rows(metrics: RunMetrics) -> List[OutputRow]:
    return [OutputRow.from_step(metrics.filter.value, row) for row in metrics.rows]


def trajectory_frame(metrics: RunMetrics) -> pd.DataFrame:
    components = metrics.component_names
    records = [r.trajectory_record(components, metrics.dim_obs) for r in output_rows(metrics)]
    return pd.DataFrame.from_records(records, columns=trajectory_columns(components, metrics.dim_obs))


def metrics_frame(metrics: RunMetrics) -> pd.DataFrame:
    records = [r.metrics_record() for r in output_rows(metrics)]
    return pd.DataFrame.from_records(records, columns=METRICS_COLUMNS)


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="")
    logger.debug(f"Записано {len(frame)} строк в {path}")
    return path


class RunSummary(BaseModel):
    """Агрегаты запуска для summary.json."""

    model_config = ConfigDict(frozen=True)

    filter: str
    model: str
    particles: int
    steps: int
    seed: int
    rmse: Optional[float] = None
    average_distinct: Optional[float] = None
    mean_max_weight: Optional[float] = None
    mean_ess: Optional[float] = None
    mean_iters: Optional[float] = None
    resample_count: int = 0
    retries: int = 0

    @classmethod
    def from_metrics(cls, metrics: RunMetrics) -> "RunSummary":
        return cls(
            filter=metrics.filter.value,
            model=metrics.model_name,
            particles=metrics.particles,
            steps=len(metrics),
            seed=metrics.seed,
            rmse=metrics.rmse,
            average_distinct=metrics.average_distinct,
            mean_max_weight=metrics.mean_max_weight,
            mean_ess=metrics.mean_ess,
            mean_iters=metrics.mean_iters,
            resample_count=metrics.resample_count,
            retries=metrics.retries,
        )


def write_json(model: BaseModel, path: Path) -> Path:
    path.write_text(model.model_dump_json(indent=2), encoding="utf-8")
    return path


def read_summary(path: Union[str, Path]) -> RunSummary:
    """Читает summary.json одиночного запуска."""
    return RunSummary.model_validate_json(Path(path).read_text(encoding="utf-8"))


def write_run_outputs(metrics: RunMetrics, output_dir: Union[str, Path]) -> Dict[str, Path]:
    """
    Пишет trajectory.csv, metrics.csv и summary.json.

    Returns:
        Dict: Имя файла -> путь
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        TRAJECTORY_FILE: write_csv(trajectory_frame(metrics), output_dir / TRAJECTORY_FILE),
        METRICS_FILE: write_csv(metrics_frame(metrics), output_dir / METRICS_FILE),
        SUMMARY_FILE: write_json(RunSummary.from_metrics(metrics), output_dir / SUMMARY_FILE),
    }
    logger.info(f"Результаты записаны в {output_dir}")
    return paths


def maxweights_frame(max_weights: Mapping[str, Sequence[float]]) -> pd.DataFrame:
    """Длинная таблица run, filter, max_weight."""
    records: List[Tuple[int, str, float]] = [
        (run, name, float(value)) for name, values in max_weights.items() for run, value in enumerate(values)
    ]
    return pd.DataFrame.from_records(records, columns=["run", "filter", "max_weight"])


def histogram_frame(max_weights: Mapping[str, Sequence[float]], edges: np.ndarray = HISTOGRAM_EDGES) -> pd.DataFrame:
    """Гистограмма максимальных весов по фиксированным корзинам [0, 1] с шагом 0.05."""
    frame = pd.DataFrame({"bin_left": edges[:-1], "bin_right": edges[1:]})
    for name, values in max_weights.items():
        counts, _ = np.histogram(np.asarray(values, dtype=float), bins=edges)
        frame[name] = counts
    return frame
