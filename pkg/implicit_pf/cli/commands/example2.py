from pathlib import Path

import click
from rich.table import Table

from implicit_pf.config import RuntimeSettings
from implicit_pf.core.exceptions import ConfigError
from implicit_pf.services.experiments import weight_study, write_weight_study

from ..common import cli_errors, console, resolve_output_dir, resolve_workers


@click.command("example2")
@click.option("--dims", type=int, default=100, show_default=True, help="Размерность состояния")
@click.option("--particles", type=int, default=1000, show_default=True, help="Число частиц")
@click.option("--runs", type=int, default=1000, show_default=True, help="Число запусков")
@click.option("--seed", type=int, default=0, show_default=True, help="Мастер-сид")
@click.option("--output-dir", type=click.Path(path_type=Path), help="Каталог результатов")
@click.option("--workers", type=int, help="Число рабочих потоков")
@click.pass_obj
def example2(settings: RuntimeSettings, dims, particles, runs, seed, output_dir, workers):
    """
    Вырождение весов на модели с независимыми гауссовыми компонентами:
    maxweights.csv и histogram.csv.
    """
    with cli_errors():
        if dims < 1 or particles < 1 or runs < 1:
            raise ConfigError("--dims, --particles и --runs должны быть положительными")
        study = weight_study(dims, particles, runs, seed=seed, workers=resolve_workers(workers, None, settings))
        paths = write_weight_study(study, resolve_output_dir(output_dir, None, settings))

    table = Table(title=f"Максимальные веса: d={dims}, M={particles}, запусков {runs}")
    table.add_column("Фильтр", style="cyan")
    table.add_column("Среднее", style="green")
    table.add_column("Доля > 0.5", style="yellow")
    for name, values in study.max_weights.items():
        share = sum(1 for v in values if v > 0.5) / len(values)
        table.add_row(name, f"{sum(values) / len(values):.4g}", f"{share:.3f}")
    console.print(table)
    for name, path in paths.items():
        console.print(f"[blue]{name}:[/] {path}")
