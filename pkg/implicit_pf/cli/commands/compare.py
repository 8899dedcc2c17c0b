from pathlib import Path

import click

from implicit_pf.config import RuntimeSettings, apply_overrides, load_run_config
from implicit_pf.services.experiments import compare_filters, write_compare_outputs

from ..common import cli_errors, console, resolve_output_dir, resolve_workers, summary_table


@click.command("compare")
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path), help="TOML файл сравнения")
@click.option("--seeds", type=int, default=1, show_default=True, help="Число сидов для усреднения")
@click.option("--seed", type=int, help="Мастер-сид")
@click.option("--particles", type=int, help="Число частиц")
@click.option("--steps", type=int, help="Число шагов")
@click.option("--output-dir", type=click.Path(path_type=Path), help="Каталог результатов")
@click.option("--workers", type=int, help="Число рабочих потоков")
@click.pass_obj
def compare(settings: RuntimeSettings, config_path, seeds, seed, particles, steps, output_dir, workers):
    """
    Сравнение фильтров из filters на одинаковых данных и сидах.
    """
    with cli_errors():
        cfg = apply_overrides(
            load_run_config(config_path),
            seed=seed,
            particles=particles,
            steps=steps,
            workers=workers,
            output_dir=output_dir,
        )
        result = compare_filters(cfg, seeds=seeds, workers=resolve_workers(workers, cfg, settings))
        target = resolve_output_dir(output_dir, cfg, settings)
        paths = write_compare_outputs(result, target)

    summary = result.summary()
    title = f"Сравнение: M={cfg.particles}, сидов {len(result.seeds)}"
    console.print(summary_table(title, [a.model_dump() for a in summary.aggregates]))
    for name, path in paths.items():
        console.print(f"[blue]{name}:[/] {path}")
