"""
Общие части команд: консоли, коды выхода, обработка ошибок, таблицы rich.
"""

import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from ..config import RunConfig, RuntimeSettings
from ..core.exceptions import ConfigError, ModelError, NumericalError


EXIT_CONFIG_ERROR = 1
EXIT_NUMERICAL_ERROR = 2

console = Console()
err_console = Console(stderr=True)


def configure_logging(level: str) -> None:
    """Ставит RichHandler на stderr для логгера пакета."""
    package_logger = logging.getLogger("implicit_pf")
    for handler in list(package_logger.handlers):
        package_logger.removeHandler(handler)
    package_logger.addHandler(RichHandler(console=err_console, show_path=False))
    package_logger.setLevel(level.upper())
    package_logger.propagate = False


@contextmanager
def cli_errors() -> Iterator[None]:
    """
    Переводит исключения пакета в коды выхода:
    ошибки конфигурации и модели - 1, численные сбои - 2.
    """
    try:
        yield
    except (ConfigError, ModelError) as e:
        err_console.print(f"[red]Ошибка конфигурации:[/] {e}")
        sys.exit(EXIT_CONFIG_ERROR)
    except NumericalError as e:
        err_console.print(f"[red]Численный сбой:[/] {e}")
        sys.exit(EXIT_NUMERICAL_ERROR)


def resolve_output_dir(flag: Optional[Path], cfg: Optional[RunConfig], settings: RuntimeSettings) -> Path:
    """Каталог результатов: флаг, затем конфигурация, затем настройки окружения."""
    if flag is not None:
        return Path(flag)
    if cfg is not None and cfg.output_dir is not None:
        return cfg.output_dir
    return settings.output_dir


def section_overrides(**values: Any) -> Optional[Dict[str, Any]]:
    """Переопределения вложенной секции из флагов; None, если ни один флаг не задан."""
    present = {key: value for key, value in values.items() if value is not None}
    return present or None


def resolve_workers(flag: Optional[int], cfg: Optional[RunConfig], settings: RuntimeSettings) -> int:
    if flag is not None:
        return flag
    if cfg is not None and cfg.workers is not None:
        return cfg.workers
    return settings.workers


def _fmt(value: Optional[float], digits: int = 4) -> str:
    return "-" if value is None else f"{value:.{digits}g}"


def summary_table(title: str, rows: Sequence[dict]) -> Table:
    """Таблица агрегатов: по строке на фильтр."""
    table = Table(title=title)
    table.add_column("Фильтр", style="cyan")
    table.add_column("Различных частиц", style="green")
    table.add_column("RMSE", style="green")
    table.add_column("Макс. вес", style="yellow")
    for row in rows:
        table.add_row(
            row["filter"],
            _fmt(row.get("average_distinct")),
            _fmt(row.get("rmse")),
            _fmt(row.get("mean_max_weight")),
        )
    return table
