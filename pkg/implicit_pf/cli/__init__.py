import click

from ..config import RuntimeSettings
from .commands.compare import compare
from .commands.example2 import example2
from .commands.run import run
from .common import configure_logging


@click.group()
@click.option("--quiet", is_flag=True, help="Только предупреждения и ошибки")
@click.pass_context
def cli(ctx, quiet):
    """
    implicit-pf: неявный фильтр частиц: запуски, сравнение с SIR и исследование весов.
    """
    settings = RuntimeSettings()
    configure_logging("WARNING" if quiet else settings.log_level)
    ctx.obj = settings


cli.add_command(run)
cli.add_command(compare)
cli.add_command(example2)
