"""
Воспроизводимые подпотоки случайных чисел.

Каждый подпоток определяется кортежем (master_seed, step, particle_index, role) и
строится на счетчиковом генераторе Philox. Потоки для разных кортежей независимы,
а повторный вызов с тем же кортежем дает тот же поток, поэтому результат не зависит
от порядка обработки частиц и числа рабочих потоков.
"""

from typing import Union

import numpy as np

from .enums import StreamRole


def _seed_sequence(master_seed: int, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in keys))


def rng_substream(
    master_seed: int,
    step: int,
    particle_index: int,
    role: Union[StreamRole, int],
) -> np.random.Generator:
    """
    Возвращает генератор для подпотока (step, particle_index, role).

    Args:
        master_seed: Мастер-сид прогона
        step: Номер шага
        particle_index: Индекс частицы (0 для общих потоков, например ресэмплинга)
        role: Роль потока

    Returns:
        np.random.Generator: Генератор Philox
    """
    if step < 0 or particle_index < 0:
        raise ValueError("step и particle_index должны быть неотрицательными")
    sequence = _seed_sequence(master_seed, step, particle_index, int(role))
    return np.random.Generator(np.random.Philox(sequence))


def standard_normals(master_seed: int, step: int, particle_index: int, role: StreamRole, size) -> np.ndarray:
    """Вектор стандартных нормальных величин из подпотока."""
    return rng_substream(master_seed, step, particle_index, role).standard_normal(size)


def derive_seed(master_seed: int, *keys: int) -> int:
    """Производный 63-битный сид (для отдельных прогонов серии)."""
    state = _seed_sequence(master_seed, *keys).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))
