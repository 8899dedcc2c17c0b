"""
Пример: для линейно-гауссовой системы неявный шаг в моментной форме
дает те же среднее и ковариацию, что и фильтр Калмана.
"""

import numpy as np
from rich.console import Console

from implicit_pf.services.baselines import KalmanState, kalman_step
from implicit_pf.services.implicit_sampling import gaussian_moment_step
from implicit_pf.systems import random_stable_linear_model, regular_obs_times, synth_twin_data


console = Console()


def main():
    model = random_stable_linear_model(3, seed=1)
    data = synth_twin_data(model, truth_seed=2, obs_times=regular_obs_times(200), steps=200)

    mean, cov = np.zeros(3), np.zeros((3, 3))
    ks = KalmanState.point(np.zeros(3))
    worst = 0.0
    for n in range(data.steps):
        b = data.observation(n + 1)
        pg = gaussian_moment_step(model, mean, cov, b, time=n)
        ks = kalman_step(model, ks, b, time=n)
        mean, cov = pg.mean, pg.sigma
        worst = max(worst, float(np.max(np.abs(mean - ks.mean))), float(np.max(np.abs(cov - ks.cov))))

    console.print(f"✅ {data.steps} шагов, наибольшее расхождение с Калманом: {worst:.2e}")


if __name__ == "__main__":
    main()
