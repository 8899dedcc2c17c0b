from pathlib import Path

import click

from implicit_pf.config import RuntimeSettings, apply_overrides, load_run_config
from implicit_pf.core.enums import FilterKind, ResampleMode
from implicit_pf.services.driver import run_filter
from implicit_pf.services.reporting import RunSummary, write_run_outputs

from ..common import cli_errors, console, resolve_output_dir, resolve_workers, section_overrides, summary_table


@click.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path), help="TOML файл запуска")
@click.option("--seed", type=int, help="Мастер-сид")
@click.option("--output-dir", type=click.Path(path_type=Path), help="Каталог результатов")
@click.option("--filter", "filter_kind", type=click.Choice([k.value for k in FilterKind]), help="Фильтр")
@click.option("--particles", type=int, help="Число частиц")
@click.option("--steps", type=int, help="Число шагов")
@click.option("--workers", type=int, help="Число рабочих потоков")
@click.option("--obs-every", type=int, help="Наблюдение каждые k шагов")
@click.option("--backward-depth", type=int, help="Глубина обратного прохода")
@click.option("--tol", type=float, help="Порог сходимости итерации")
@click.option("--max-iters", type=int, help="Максимум итераций неявного шага")
@click.option("--warm-start/--cold-start", default=None, help="Начальное приближение итерации")
@click.option(
    "--resample", "resample_mode", type=click.Choice([m.value for m in ResampleMode]), help="Правило ресэмплинга"
)
@click.pass_obj
def run(
    settings: RuntimeSettings,
    config_path,
    seed,
    output_dir,
    filter_kind,
    particles,
    steps,
    workers,
    obs_every,
    backward_depth,
    tol,
    max_iters,
    warm_start,
    resample_mode,
):
    """
    Запуск одного фильтра: trajectory.csv, metrics.csv, summary.json.
    """
    with cli_errors():
        cfg = apply_overrides(
            load_run_config(config_path),
            seed=seed,
            filter=filter_kind,
            particles=particles,
            steps=steps,
            workers=workers,
            output_dir=output_dir,
            backward_depth=backward_depth,
            observations=section_overrides(every=obs_every),
            iteration=section_overrides(tol=tol, max_iters=max_iters, warm_start=warm_start),
            resample=section_overrides(mode=resample_mode),
        )
        target = resolve_output_dir(output_dir, cfg, settings)
        metrics = run_filter(cfg, workers=resolve_workers(workers, cfg, settings))
        paths = write_run_outputs(metrics, target)

    summary = RunSummary.from_metrics(metrics)
    console.print(summary_table(f"Запуск {cfg.model.kind.value}, M={cfg.particles}", [summary.model_dump()]))
    for name, path in paths.items():
        console.print(f"[blue]{name}:[/] {path}")
