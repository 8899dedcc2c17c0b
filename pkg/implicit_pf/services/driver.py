"""
Драйвер ассимиляции: цикл по шагам и частицам, накопление весов, ресэмплинг и метрики.

На каждом шаге выбирается вид хода:
    - наблюдение в n+1 есть - прямой неявный шаг;
    - наблюдения в n+1 нет, а в n+2 есть - совместный шаг для пары (X^{n+1}, X^{n+2});
    - иначе - выборка из переходной плотности (вес не меняется).
Все случайные величины берутся из подпотоков (seed, шаг, частица, роль) до запуска
шага, поэтому результат не зависит от числа рабочих потоков.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt

from ..config import RunConfig
from ..core.enums import FilterKind, StepKind, StreamRole
from ..core.exceptions import ConfigError, NonConvergenceError, NumericalError
from ..core.model import Ensemble, Particle, StateSpaceModel
from ..core.rng import rng_substream, standard_normals
from ..systems import build_model, initial_state, synth_twin_data
from ..systems.twin import TwinData
from .baselines import sir_step
from .implicit_sampling import StepResult, backward_step, forward_step, normalized_log_weight, sparse_step
from .resampling import apply_policy, distinct_count, effective_sample_size, normalize_log_weights


logger = logging.getLogger(__name__)

SIR_KIND = "sir"


@dataclass
class StepMetrics:
    """
    Метрики ансамбля в момент step.

    Attributes:
        step: Индекс шага
        time: Физическое время
        kind: Вид хода, породившего состояние
        mean, std: Взвешенные среднее и стандартное отклонение по компонентам
        max_weight: Максимальный нормированный вес перед ресэмплингом
        ess: Эффективный размер выборки перед ресэмплингом
        distinct: Число различных предков после ресэмплинга
        resampled: Был ли ресэмплинг после этого шага
        iters_mean: Среднее число итераций неявного шага (0 для SIR)
        observation: Наблюдение (если есть)
        truth: Истинное состояние двойного эксперимента
    """

    step: int
    time: float
    kind: str
    mean: np.ndarray
    std: np.ndarray
    max_weight: float
    ess: float
    distinct: int
    resampled: bool
    iters_mean: float
    observation: Optional[np.ndarray] = None
    truth: Optional[np.ndarray] = None


@dataclass
class RunMetrics:
    """Метрики запуска: по строке на шаг и агрегаты."""

    filter: FilterKind
    model_name: str
    component_names: Tuple[str, ...]
    dim_obs: int
    particles: int
    seed: int
    rows: List[StepMetrics] = field(default_factory=list)
    retries: int = 0

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def rmse(self) -> Optional[float]:
        """Среднеквадратичная ошибка взвешенного среднего относительно истины."""
        pairs = [(r.mean, r.truth) for r in self.rows if r.truth is not None]
        if not pairs:
            return None
        errors = np.stack([m - t for m, t in pairs])
        return float(np.sqrt(np.mean(errors**2)))

    @property
    def resample_count(self) -> int:
        return sum(1 for r in self.rows if r.resampled)

    @property
    def average_distinct(self) -> Optional[float]:
        """Среднее число различных частиц после ресэмплинга (по шагам с ресэмплингом)."""
        counts = [r.distinct for r in self.rows if r.resampled]
        return float(np.mean(counts)) if counts else None

    @property
    def mean_max_weight(self) -> Optional[float]:
        return float(np.mean([r.max_weight for r in self.rows])) if self.rows else None

    @property
    def mean_ess(self) -> Optional[float]:
        return float(np.mean([r.ess for r in self.rows])) if self.rows else None

    @property
    def mean_iters(self) -> Optional[float]:
        return float(np.mean([r.iters_mean for r in self.rows])) if self.rows else None


@dataclass
class _Move:
    """Результат хода одной частицы: новые состояния по времени, приращение веса, итерации."""

    states: Tuple[np.ndarray, ...]
    increment: float
    iters: int
    refined: bool = False


@dataclass
class _Correction:
    """Результат обратного прохода одной частицы: lag -> новое состояние, приращение веса."""

    states: Dict[int, np.ndarray]
    increment: float


def weighted_moments(states: np.ndarray, probs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Взвешенные среднее и стандартное отклонение по строкам states."""
    mean = probs @ states
    var = probs @ (states - mean) ** 2
    return mean, np.sqrt(np.maximum(var, 0.0))


class FilterDriver:
    """
    Запуск одного фильтра на данных двойного эксперимента.

    Args:
        cfg: Конфигурация запуска
        data: Готовые данные (если None - генерируются из cfg.observations)
        workers: Число потоков (перекрывает cfg.workers)
    """

    def __init__(self, cfg: RunConfig, data: Optional[TwinData] = None, workers: Optional[int] = None):
        self.cfg = cfg
        self.model = build_model(cfg.model)
        self.x0 = initial_state(cfg.model, self.model)
        if data is None:
            data = synth_twin_data(
                self.model, cfg.truth_seed, cfg.observations.schedule(cfg.steps), cfg.steps, self.x0
            )
        if data.steps < cfg.steps:
            raise ConfigError(f"Данные содержат {data.steps} шагов, запрошено {cfg.steps}")
        if data.truth.shape[1] != self.model.dim_state:
            raise ConfigError("Размерность данных не совпадает с размерностью модели")
        self.data = data
        self.workers = workers or cfg.workers or 1
        self.seed = cfg.seed
        self._pool: Optional[ThreadPoolExecutor] = None

    def initial_ensemble(self) -> Ensemble:
        """M копий x0 (с разбросом init_std, если задан)."""
        m = self.model.dim_state
        states = []
        for i in range(self.cfg.particles):
            x = self.x0.copy()
            if self.cfg.model.init_std > 0:
                x = x + self.cfg.model.init_std * standard_normals(self.seed, 0, i, StreamRole.INIT, m)
            states.append(self.model.constrain(x))
        return Ensemble.from_states(states, 0, self.seed, history_len=self.cfg.backward_depth + 2)

    def run(self) -> RunMetrics:
        """
        Выполняет все шаги.

        Raises:
            NumericalError: При численном сбое (для несошедшейся итерации - с номером шага и частицы)
        """
        cfg = self.cfg
        metrics = RunMetrics(
            filter=cfg.filter,
            model_name=self.model.name,
            component_names=self.model.component_names,
            dim_obs=self.model.dim_obs,
            particles=cfg.particles,
            seed=self.seed,
        )
        if cfg.steps == 0:
            return metrics
        logger.info(
            f"Запуск {cfg.filter.value}: модель {self.model.name}, M={cfg.particles}, "
            f"шагов {cfg.steps}, потоков {self.workers}"
        )
        ensemble = self.initial_ensemble()
        self._pool = ThreadPoolExecutor(max_workers=self.workers) if self.workers > 1 else None
        try:
            n = 0
            while n < cfg.steps:
                n = self._advance(ensemble, n, metrics)
        except NumericalError as e:
            logger.error(f"Численный сбой: {e}")
            raise
        finally:
            if self._pool is not None:
                self._pool.shutdown()
                self._pool = None
        logger.info(f"Завершено {cfg.filter.value}: RMSE={metrics.rmse}, ресэмплингов {metrics.resample_count}")
        return metrics

    def _map(self, fn: Callable, items: Iterable) -> list:
        if self._pool is None:
            return [fn(*item) for item in items]
        return list(self._pool.map(lambda item: fn(*item), items))

    def plan(self, n: int) -> str:
        """Вид хода из состояния n."""
        if self.cfg.filter == FilterKind.SIR:
            return SIR_KIND
        if self.data.observation(n + 1) is not None:
            return StepKind.FORWARD.value
        if n + 2 <= self.cfg.steps and self.data.observation(n + 2) is not None:
            return StepKind.SPARSE.value
        return StepKind.PRIOR.value

    def _advance(self, ensemble: Ensemble, n: int, metrics: RunMetrics) -> int:
        kind = self.plan(n)
        particles = ensemble.particles
        moves: List[_Move] = self._map(
            lambda i, p: self._move_particle(kind, n, i, p), list(enumerate(particles))
        )
        for p, move in zip(particles, moves):
            for state in move.states[:-1]:
                p.advance(self.model.constrain(state))
            p.advance(self.model.constrain(move.states[-1]), move.increment)
        n_new = n + len(moves[0].states)
        metrics.retries += sum(1 for mv in moves if mv.refined)
        iters_mean = float(np.mean([mv.iters for mv in moves]))
        assimilated = self.data.observation(n_new) is not None

        corrected = 0
        if self.cfg.filter == FilterKind.IMPLICIT_BACKWARD:
            corrected = self._backward_pass(ensemble, n_new)
            assimilated = assimilated or corrected > 0

        log_weights = ensemble.log_weights
        probs = normalize_log_weights(log_weights)
        max_weight = float(np.max(probs))
        ess = effective_sample_size(log_weights)
        distinct_before = distinct_count(particles)
        for t in range(n + 1, n_new + 1):
            metrics.rows.append(
                self._row(particles, probs, t, n_new - t, kind, max_weight, ess, distinct_before, iters_mean)
            )
        for lag in range(1, corrected + 1):
            t = n_new - lag
            if 1 <= t <= len(metrics.rows):
                previous = metrics.rows[t - 1]
                metrics.rows[t - 1] = self._row(
                    particles, probs, t, lag, StepKind.BACKWARD.value, max_weight, ess,
                    previous.distinct, previous.iters_mean, resampled=previous.resampled,
                )

        if assimilated:
            rng = rng_substream(self.seed, n_new, 0, StreamRole.RESAMPLE)
            resampled = apply_policy(particles, self.cfg.resample, rng)
            if resampled is not None:
                ensemble.particles = resampled
                last = metrics.rows[-1]
                last.resampled = True
                last.distinct = distinct_count(resampled)
        ensemble.time_index = n_new
        logger.debug(f"Шаг {n_new} ({kind}): max w={max_weight:.3f}, ESS={ess:.1f}, итераций {iters_mean:.2f}")
        return n_new

    def _row(
        self,
        particles: Sequence[Particle],
        probs: np.ndarray,
        t: int,
        lag: int,
        kind: str,
        max_weight: float,
        ess: float,
        distinct: int,
        iters_mean: float,
        resampled: bool = False,
    ) -> StepMetrics:
        states = np.stack([p.past(lag) for p in particles])
        mean, std = weighted_moments(states, probs)
        truth = self.data.truth[t] if t < self.data.truth.shape[0] else None
        return StepMetrics(
            step=t,
            time=self.model.physical_time(t),
            kind=kind,
            mean=mean,
            std=std,
            max_weight=max_weight,
            ess=ess,
            distinct=distinct,
            resampled=resampled,
            iters_mean=iters_mean,
            observation=self.data.observation(t),
            truth=truth,
        )

    def _move_particle(self, kind: str, n: int, index: int, particle: Particle) -> _Move:
        model, iteration = self.model, self.cfg.iteration
        m = model.dim_state
        x = particle.state
        try:
            if kind == SIR_KIND:
                noise = standard_normals(self.seed, n + 1, index, StreamRole.SIR, m)
                new_state, increment = sir_step(model, x, self.data.observation(n + 1), noise, time=n)
                return _Move((new_state,), increment, 0)
            if kind == StepKind.PRIOR.value:
                xi = standard_normals(self.seed, n + 1, index, StreamRole.XI, m)
                result = forward_step(model, x, None, xi, iteration, time=n)
                # Выборка из переходной плотности не меняет вес
                return _Move((result.new_state,), 0.0, result.iters)
            if kind == StepKind.SPARSE.value:
                pair = rng_substream(self.seed, n + 1, index, StreamRole.XI_PAIR).standard_normal((2, m))
                result = sparse_step(model, x, self.data.observation(n + 2), pair[0], pair[1], iteration, time=n + 1)
                return _Move(
                    (result.mid_state, result.new_state), normalized_log_weight(model, result), result.iters
                )
            xi = standard_normals(self.seed, n + 1, index, StreamRole.XI, m)
            result, increment, refined = self._forward_with_refinement(x, self.data.observation(n + 1), xi, n, index)
            return _Move((result.new_state,), increment, result.iters, refined)
        except NonConvergenceError as e:
            error = e.with_context(n + 1, index)
            logger.error(str(error))
            raise error from e

    def _forward_with_refinement(
        self, x: np.ndarray, b: np.ndarray, xi: np.ndarray, n: int, index: int
    ) -> Tuple[StepResult, float, bool]:
        """
        Прямой шаг; если итерация не сошлась, шаг повторяется один раз как совместная
        выборка пары состояний на модели с шагом delta / 2.

        Returns:
            Tuple: (результат шага, нормированное приращение веса, был ли повтор)
        """
        retrying = Retrying(
            stop=stop_after_attempt(2),
            retry=retry_if_exception_type(NonConvergenceError),
            before_sleep=before_sleep_log(logger, logging.WARNING),
            reraise=True,
        )
        for attempt in retrying:
            with attempt:
                if attempt.retry_state.attempt_number == 1:
                    result = forward_step(self.model, x, b, xi, self.cfg.iteration, time=n)
                    return result, normalized_log_weight(self.model, result), False
                result = self.refined_step(x, b, n, index)
                return result, normalized_log_weight(self.half_model, result), True
        raise AssertionError("Retrying завершился без результата")

    @property
    def half_model(self) -> StateSpaceModel:
        """Модель с шагом delta / 2 для повторных шагов."""
        return self.model.with_delta(self.model.delta / 2)

    def refined_step(self, x: np.ndarray, b: np.ndarray, n: int, index: int) -> StepResult:
        """Шаг n -> n+1 как пара полушагов; промежуточное состояние отбрасывается."""
        half = self.half_model
        pair = rng_substream(self.seed, n + 1, index, StreamRole.RETRY).standard_normal((2, half.dim_state))
        logger.debug(f"Шаг {n + 1}, частица {index}: повтор с шагом {half.delta}")
        return sparse_step(half, x, b, pair[0], pair[1], self.cfg.iteration, time=2 * n + 1)

    def _backward_pass(self, ensemble: Ensemble, n_new: int) -> int:
        """
        Пересэмплирует до backward_depth прошлых состояний каждой частицы (начиная с ближайшего).

        Returns:
            int: Число пересэмплированных моментов
        """
        depth = min(self.cfg.backward_depth, len(ensemble.particles[0].history) - 2)
        if depth < 1:
            return 0
        corrections: List[_Correction] = self._map(
            lambda i, p: self._correct_particle(n_new, depth, i, p), list(enumerate(ensemble.particles))
        )
        for p, correction in zip(ensemble.particles, corrections):
            for lag, state in correction.states.items():
                p.replace_past(lag, state)
            p.log_weight += correction.increment
        return depth

    def _correct_particle(self, n_new: int, depth: int, index: int, particle: Particle) -> _Correction:
        m = self.model.dim_state
        window = [particle.past(lag) for lag in range(depth + 2)]
        noise = rng_substream(self.seed, n_new, index, StreamRole.BACKWARD).standard_normal((depth, m))
        states: Dict[int, np.ndarray] = {}
        increment = 0.0
        for lag in range(1, depth + 1):
            t = n_new - lag
            try:
                result = backward_step(
                    self.model, window[lag + 1], window[lag - 1], self.data.observation(t), noise[lag - 1],
                    self.cfg.iteration, time=t, x_current=window[lag],
                )
            except NonConvergenceError as e:
                error = e.with_context(t, index)
                logger.error(str(error))
                raise error from e
            window[lag] = self.model.constrain(result.new_state)
            states[lag] = window[lag]
            increment += result.log_weight_increment
        return _Correction(states, increment)


def run_filter(cfg: RunConfig, data: Optional[TwinData] = None, workers: Optional[int] = None) -> RunMetrics:
    """
    Запускает фильтр по конфигурации.

    Args:
        cfg: Конфигурация
        data: Данные двойного эксперимента (по умолчанию генерируются)
        workers: Число рабочих потоков

    Returns:
        RunMetrics: Метрики по шагам
    """
    return FilterDriver(cfg, data, workers).run()

