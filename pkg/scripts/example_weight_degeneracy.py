"""
Пример: максимальные нормированные веса SIR и неявного фильтра
на модели с независимыми гауссовыми компонентами разной размерности.
"""

from rich.console import Console
from rich.table import Table

from implicit_pf.core.enums import FilterKind
from implicit_pf.services.experiments import weight_study


console = Console()


def main():
    table = Table(title="Максимальный вес после одного шага, M = 1000")
    table.add_column("d", style="cyan")
    table.add_column("SIR: доля > 0.5", style="yellow")
    table.add_column("Неявный: макс. вес", style="green")

    for dims in (1, 10, 100):
        study = weight_study(dims=dims, particles=1000, runs=100, seed=dims, workers=4)
        table.add_row(
            str(dims),
            f"{study.fraction_above(FilterKind.SIR, 0.5):.2f}",
            f"{max(study.max_weights['implicit']):.4g}",
        )

    console.print(table)


if __name__ == "__main__":
    main()
