"""CLI entry point for nodal-lab."""

import logging
from pathlib import Path

import click
from rich.logging import RichHandler

from nodal_lab import __version__
from nodal_lab.commands.common import EXIT_INVALID, console
from nodal_lab.commands.eigen import eigen_group
from nodal_lab.commands.kacrice import kacrice_group
from nodal_lab.commands.lattice import lattice_group
from nodal_lab.commands.loglab import loglab_group
from nodal_lab.commands.measure import measure_group
from nodal_lab.commands.nodal import nodal_group
from nodal_lab.commands.rwm import rwm_group
from nodal_lab.config import ConfigError, load_config, resolve_threads


def configure_logging(verbose: bool) -> None:
    """Route the package logger through rich on stderr."""
    logger = logging.getLogger("nodal_lab")
    logger.handlers.clear()
    handler = RichHandler(console=console, show_path=False, rich_tracebacks=False)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    logger.propagate = False


@click.group()
@click.version_option(version=__version__, prog_name="nodal-lab")
@click.option(
    "--config",
    "-c",
    "config_path",
    type=click.Path(exists=True, resolve_path=True, path_type=Path),
    default=None,
    help="YAML or JSON file of option defaults (flags override it)",
)
@click.option(
    "--threads",
    "-t",
    type=click.IntRange(min=1),
    default=None,
    help="Worker threads (default: $NODAL_LAB_THREADS, else 1)",
)
@click.option("--verbose", "-v", is_flag=True, default=False, help="Debug logging")
@click.pass_context
def main(
    ctx: click.Context, config_path: Path | None, threads: int | None, verbose: bool
) -> None:
    """Numerical lab for nodal lengths of toral eigenfunctions.

    Lattice arithmetic, spectral measures, Gaussian random waves, Kac-Rice
    constants and Planck-scale experiments; every command writes CSV with a
    self-describing header and exits 0 (ok), 1 (internal consistency failure),
    2 (invalid input) or 3 (budget or convergence failure, partial output
    written).

    \b
    Quick start:
      nodal-lab lattice points --lambda 25
      nodal-lab kacrice c1 --alpha 0 --beta 0
      nodal-lab rwm stats --measure lebesgue --R 32 --n 200 --seed 7 -o rwm.csv
    """
    configure_logging(verbose)
    ctx.ensure_object(dict)
    try:
        config = load_config(config_path) if config_path else None
        ctx.obj["threads"] = resolve_threads(threads, config)
    except ConfigError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(EXIT_INVALID) from None
    if config is not None:
        ctx.default_map = config.default_map()


# Register command groups
main.add_command(lattice_group, name="lattice")
main.add_command(eigen_group, name="eigen")
main.add_command(nodal_group, name="nodal")
main.add_command(measure_group, name="measure")
main.add_command(rwm_group, name="rwm")
main.add_command(kacrice_group, name="kacrice")
main.add_command(loglab_group, name="loglab")


if __name__ == "__main__":
    main()
