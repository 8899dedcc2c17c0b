"""
Эксперименты: сравнение фильтров на общих синтетических данных и исследование
вырождения весов на модели с независимыми гауссовыми компонентами.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel

from ..config import RunConfig
from ..core.enums import FilterKind, StreamRole
from ..core.exceptions import ConfigError
from ..core.model import StateSpaceModel
from ..core.rng import derive_seed, rng_substream, standard_normals
from ..systems import build_model, iid_gaussian_model, initial_state, synth_twin_data
from .baselines import max_normalized_weight, sir_step
from .driver import RunMetrics, run_filter
from .implicit_sampling import DEFAULT_ITERATION, IterationConfig, forward_step
from .reporting import (
    HISTOGRAM_FILE,
    MAXWEIGHTS_FILE,
    RunSummary,
    histogram_frame,
    maxweights_frame,
    trajectory_frame,
    write_csv,
    write_json,
)


logger = logging.getLogger(__name__)


class FilterAggregate(BaseModel):
    """Средние по сидам метрики одного фильтра (аналог строки таблицы сравнения)."""

    filter: str
    seeds: int
    average_distinct: Optional[float] = None
    rmse: Optional[float] = None
    mean_max_weight: Optional[float] = None


class CompareSummary(BaseModel):
    """Сводка сравнения: агрегаты по фильтрам и все отдельные запуски."""

    aggregates: List[FilterAggregate]
    runs: List[RunSummary]


def _mean(values: Sequence[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


@dataclass
class CompareResult:
    """Результаты сравнения: запуски по фильтрам, по одному на сид."""

    filters: List[FilterKind]
    seeds: List[int]
    runs: Dict[FilterKind, List[RunMetrics]] = field(default_factory=dict)

    def aggregate(self, kind: FilterKind) -> FilterAggregate:
        runs = self.runs[kind]
        return FilterAggregate(
            filter=kind.value,
            seeds=len(runs),
            average_distinct=_mean([r.average_distinct for r in runs]),
            rmse=_mean([r.rmse for r in runs]),
            mean_max_weight=_mean([r.mean_max_weight for r in runs]),
        )

    def summary(self) -> CompareSummary:
        return CompareSummary(
            aggregates=[self.aggregate(kind) for kind in self.filters],
            runs=[RunSummary.from_metrics(r) for kind in self.filters for r in self.runs[kind]],
        )


def compare_filters(cfg: RunConfig, seeds: int = 1, workers: Optional[int] = None) -> CompareResult:
    """
    Запускает каждый фильтр из cfg.filters на одних и тех же данных и сидах.

    При seeds > 1 сиды запусков и истинных траекторий выводятся из мастер-сида.

    Raises:
        ConfigError: Если фильтров меньше двух
    """
    if len(cfg.filters) < 2:
        raise ConfigError("Для сравнения нужно указать не меньше двух фильтров в filters")
    if seeds < 1:
        raise ConfigError(f"seeds должно быть положительным, получено {seeds}")
    model = build_model(cfg.model)
    x0 = initial_state(cfg.model, model)
    schedule = cfg.observations.schedule(cfg.steps)
    result = CompareResult(filters=list(cfg.filters), seeds=[])
    for kind in cfg.filters:
        result.runs[kind] = []
    for s in range(seeds):
        seed = cfg.seed if seeds == 1 else derive_seed(cfg.seed, s)
        truth_seed = cfg.truth_seed if seeds == 1 else derive_seed(cfg.truth_seed, s, 1)
        result.seeds.append(seed)
        data = synth_twin_data(model, truth_seed, schedule, cfg.steps, x0)
        for kind in cfg.filters:
            run_cfg = cfg.model_copy(update={"filter": kind, "seed": seed})
            result.runs[kind].append(run_filter(run_cfg, data, workers))
        logger.info(f"Сравнение: сид {s + 1}/{seeds} завершен")
    return result


def write_compare_outputs(result: CompareResult, output_dir: Union[str, Path]) -> Dict[str, Path]:
    """Пишет summary.json сравнения и trajectory_<filter>.csv первого сида."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    paths = {"summary.json": write_json(result.summary(), output_dir / "summary.json")}
    for kind in result.filters:
        name = f"trajectory_{kind.value}.csv"
        paths[name] = write_csv(trajectory_frame(result.runs[kind][0]), output_dir / name)
    return paths


@dataclass
class WeightStudy:
    """Максимальные нормированные веса по запускам для каждого фильтра."""

    dims: int
    particles: int
    max_weights: Dict[str, List[float]]

    @property
    def runs(self) -> int:
        return len(next(iter(self.max_weights.values()), []))

    def fraction_above(self, kind: FilterKind, threshold: float) -> float:
        values = np.asarray(self.max_weights[kind.value])
        return float(np.mean(values > threshold))


def weight_study_run(
    model: StateSpaceModel,
    particles: int,
    seed: int,
    filters: Sequence[FilterKind],
    cfg: IterationConfig = DEFAULT_ITERATION,
) -> Dict[str, float]:
    """
    Один запуск: истина X = V, наблюдение b = X + W, один шаг каждым фильтром из нуля.

    Returns:
        Dict: Имя фильтра -> максимальный нормированный вес
    """
    d = model.dim_state
    x_prev = np.zeros(d)
    truth = standard_normals(seed, 1, 0, StreamRole.TRUTH, d)
    b = model.obs_map(truth) + model.obs_noise * standard_normals(seed, 1, 0, StreamRole.OBSERVATION, d)
    result: Dict[str, float] = {}
    for kind in filters:
        if kind.is_implicit:
            xis = rng_substream(seed, 1, 0, StreamRole.XI).standard_normal((particles, d))
            log_weights = [forward_step(model, x_prev, b, xi, cfg).log_weight_increment for xi in xis]
        else:
            noises = rng_substream(seed, 1, 0, StreamRole.SIR).standard_normal((particles, d))
            log_weights = [sir_step(model, x_prev, b, noise)[1] for noise in noises]
        result[kind.value] = max_normalized_weight(log_weights)
    return result


def weight_study(
    dims: int,
    particles: int,
    runs: int,
    seed: int = 0,
    workers: int = 1,
    filters: Sequence[FilterKind] = (FilterKind.IMPLICIT, FilterKind.SIR),
) -> WeightStudy:
    """
    Максимальный нормированный вес после одного шага в runs независимых запусках.

    Сид каждого запуска выводится из мастер-сида, запуски распределяются по потокам.
    """
    if dims < 1 or particles < 1 or runs < 1:
        raise ConfigError("dims, particles и runs должны быть положительными")
    model = iid_gaussian_model(dims)
    seeds = [derive_seed(seed, r) for r in range(runs)]

    def one(run_seed: int) -> Dict[str, float]:
        return weight_study_run(model, particles, run_seed, filters)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    max_weights = {kind.value: [r[kind.value] for r in results] for kind in filters}
    logger.info(f"Исследование весов: d={dims}, M={particles}, запусков {runs}")
    return WeightStudy(dims=dims, particles=particles, max_weights=max_weights)


def write_weight_study(study: WeightStudy, output_dir: Union[str, Path]) -> Dict[str, Path]:
    """Пишет maxweights.csv и histogram.csv."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    return {
        MAXWEIGHTS_FILE: write_csv(maxweights_frame(study.max_weights), output_dir / MAXWEIGHTS_FILE),
        HISTOGRAM_FILE: write_csv(histogram_frame(study.max_weights), output_dir / HISTOGRAM_FILE),
    }
