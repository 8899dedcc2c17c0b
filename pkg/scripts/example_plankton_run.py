"""
Пример запуска неявного фильтра на модели планктона NPZD
с еженедельными наблюдениями log P и сравнение с SIR.
"""

import logging
from pathlib import Path

from rich.console import Console
from rich.logging import RichHandler

from implicit_pf.config import apply_overrides, load_run_config
from implicit_pf.services.driver import run_filter
from implicit_pf.services.reporting import write_run_outputs


logging.basicConfig(level=logging.INFO, format="%(message)s", handlers=[RichHandler()])
console = Console()

CONFIG = Path(__file__).parent.parent / "configs" / "plankton.toml"


def main():
    """
    Основной сценарий:
    1. Загрузка конфигурации и сокращение до 20 недель.
    2. Запуск неявного фильтра и SIR на одних данных.
    3. Запись результатов и вывод итогов.
    """
    cfg = apply_overrides(load_run_config(CONFIG), steps=140, particles=50)

    for name in ("implicit", "sir"):
        console.print(f"▶️ Запуск фильтра {name}...")
        metrics = run_filter(apply_overrides(cfg, filter=name))
        paths = write_run_outputs(metrics, Path("output") / f"plankton_{name}")

        console.print(f"✅ RMSE: {metrics.rmse:.4f}")
        console.print(f"📊 Различных частиц после ресэмплинга: {metrics.average_distinct:.1f}")
        console.print(f"📁 {paths['trajectory.csv']}")


if __name__ == "__main__":
    main()
