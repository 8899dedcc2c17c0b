"""
Синтетические данные для двойного эксперимента: истинная траектория и наблюдения.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ..core.enums import StreamRole
from ..core.exceptions import ModelError
from ..core.model import ObservationRecord, StateSpaceModel, propagate
from ..core.rng import standard_normals
from ..utils import as_vector


logger = logging.getLogger(__name__)


@dataclass
class TwinData:
    """
    Истинная траектория и записи наблюдений.

    Attributes:
        truth: Массив (steps + 1) x m, строка n - истинное X^n
        observations: Записи для индексов 0..steps
    """

    truth: np.ndarray
    observations: List[ObservationRecord]

    @property
    def steps(self) -> int:
        return self.truth.shape[0] - 1

    @property
    def obs_count(self) -> int:
        return sum(1 for r in self.observations if r.present)

    def observation(self, time_index: int) -> Optional[np.ndarray]:
        """Наблюдение в момент time_index или None."""
        if not 0 <= time_index < len(self.observations):
            return None
        record = self.observations[time_index]
        return record.value if record.present else None


def regular_obs_times(steps: int, every: int = 1, first: Optional[int] = None) -> List[int]:
    """Индексы наблюдений every, 2*every, ... не больше steps."""
    if every < 1:
        raise ValueError(f"every должно быть положительным, получено {every}")
    start = every if first is None else first
    return list(range(start, steps + 1, every))


def synth_twin_data(
    model: StateSpaceModel,
    truth_seed: int,
    obs_times: Sequence[int],
    steps: Optional[int] = None,
    x0: Optional[np.ndarray] = None,
) -> TwinData:
    """
    Моделирует истинную траекторию и наблюдения h(truth) + Q W в заданные моменты.

    Args:
        model: Модель
        truth_seed: Сид траектории и шума наблюдений
        obs_times: Строго возрастающие индексы наблюдений из [1, steps]
        steps: Длина траектории (по умолчанию последний индекс наблюдения)
        x0: Начальное состояние (по умолчанию ноль)

    Raises:
        ModelError: Если индексы наблюдений не возрастают или выходят за траекторию
    """
    obs_times = [int(t) for t in obs_times]
    if any(b <= a for a, b in zip(obs_times, obs_times[1:])):
        raise ModelError("Моменты наблюдений должны строго возрастать")
    if steps is None:
        steps = obs_times[-1] if obs_times else 0
    if obs_times and (obs_times[0] < 1 or obs_times[-1] > steps):
        raise ModelError(f"Моменты наблюдений должны лежать в [1, {steps}]")

    m = model.dim_state
    truth = np.empty((steps + 1, m))
    truth[0] = np.zeros(m) if x0 is None else as_vector(x0, m, "x0")
    for n in range(steps):
        noise = standard_normals(truth_seed, n + 1, 0, StreamRole.TRUTH, m)
        truth[n + 1] = model.constrain(propagate(model, truth[n], n, noise))

    present = set(obs_times)
    observations = []
    for n in range(steps + 1):
        if n not in present:
            observations.append(ObservationRecord.absent(n))
            continue
        noise = standard_normals(truth_seed, n, 0, StreamRole.OBSERVATION, model.dim_obs)
        value = model.obs_map(truth[n]) + model.obs_noise * noise
        observations.append(ObservationRecord(time_index=n, value=value, present=True))
    logger.info(f"Двойной эксперимент {model.name}: {steps} шагов, {len(obs_times)} наблюдений")
    return TwinData(truth=truth, observations=observations)
