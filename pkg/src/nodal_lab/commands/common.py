"""Plumbing shared by the command groups: run configs, outputs and exit codes."""

import json
import logging
import sys
from collections.abc import Iterable, Iterator, Sequence
from contextlib import contextmanager
from pathlib import Path
from typing import Any, NoReturn

import click
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape

from nodal_lab.config import ConfigError, canonical_json, config_hash
from nodal_lab.errors import (
    BudgetExceededError,
    ConsistencyError,
    InvalidInputError,
)
from nodal_lab.measure import fourier_moment, resolve_measure
from nodal_lab.models import DirectionMeasure, ExperimentConfig
from nodal_lab.utils import format_cell, output_header, write_csv, write_json

logger = logging.getLogger(__name__)

console = Console(stderr=True)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2
EXIT_INCOMPLETE = 3

OUTPUT = click.option(
    "--output",
    "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="CSV file (stdout if omitted); a JSON summary is written beside it",
)
SEED = click.option("--seed", type=int, required=True, help="Master seed")
SPEC = click.option(
    "--spec",
    "spec_path",
    type=click.Path(dir_okay=False, path_type=Path),
    required=True,
    help="Eigenfunction spec JSON (see 'eigen build')",
)
MEASURE = click.option(
    "--measure",
    "measure_name",
    type=str,
    default="lebesgue",
    show_default=True,
    help="lebesgue, eight-arc, four-atom or a measure JSON file",
)


def fail(message: str, code: int = EXIT_INVALID) -> NoReturn:
    """Print an error and exit with ``code``."""
    console.print(f"[red]Error:[/red] {escape(message)}")
    raise SystemExit(code)


@contextmanager
def guarded() -> Iterator[None]:
    """Map library errors onto exit codes."""
    try:
        yield
    except (InvalidInputError, ConfigError) as e:
        fail(str(e), EXIT_INVALID)
    except ValidationError as e:
        fail(f"invalid input:\n{e}", EXIT_INVALID)
    except BudgetExceededError as e:
        fail(str(e), EXIT_INCOMPLETE)
    except ConsistencyError as e:
        fail(f"internal consistency check failed: {e}", EXIT_FAILURE)


class Run:
    """One command invocation: its resolved config and output header."""

    def __init__(
        self, ctx: click.Context, params: dict[str, Any], seed: int | None = None
    ):
        self.threads: int = ctx.obj.get("threads", 1) if ctx.obj else 1
        self.config = ExperimentConfig(
            command=ctx.command_path.split(" ", 1)[-1],
            params={k: _plain(v) for k, v in params.items()},
            seed=seed,
            threads=self.threads,
        )
        self.hash = config_hash(self.config)
        self.header = output_header(self.config.command, self.hash, canonical_json(self.config))
        logger.debug("run %s config_hash=%s", self.config.command, self.hash)

    def table(
        self,
        output: Path | None,
        columns: Sequence[str],
        rows: Iterable[Sequence[Any]],
    ) -> None:
        """CSV to ``output``, or to stdout when no path is given."""
        if output is not None:
            write_csv(output, columns, rows, self.header)
            console.print(f"  Wrote [dim]{output}[/dim]")
            return
        out = sys.stdout
        out.write(self.header)
        out.write(",".join(columns) + "\n")
        for row in rows:
            out.write(",".join(format_cell(v) for v in row) + "\n")

    @property
    def meta(self) -> dict[str, Any]:
        """Hash and canonical config, appended to every JSON summary."""
        return {"config_hash": self.hash, "config": json.loads(canonical_json(self.config))}

    def summary(self, output: Path | None, data: dict[str, Any]) -> None:
        """JSON summary beside ``output``; carries the config and its hash."""
        if output is None:
            return
        path = output.with_suffix(".json")
        write_json(path, {**data, **self.meta})
        console.print(f"  Wrote [dim]{path}[/dim]")


def _plain(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def done(message: str, incomplete: bool = False) -> None:
    """Print the one-line summary; exit 3 when the results are flagged."""
    if incomplete:
        console.print(f"[yellow]{message}[/yellow]")
        raise SystemExit(EXIT_INCOMPLETE)
    console.print(f"[green]{message}[/green]")


def open_measure(name_or_path: str) -> DirectionMeasure:
    """Resolve a named measure or a measure JSON file."""
    mu = resolve_measure(name_or_path)
    if name_or_path == "eight-arc":
        m2 = fourier_moment(mu, 2)
        logger.warning(
            "eight-arc measure has mu_hat(2) = %.6f%+.6fi (modulus %.4f), not 1; "
            "the computed moment is used throughout",
            m2.re,
            m2.im,
            abs(m2),
        )
    return mu


def parse_pair(
    ctx: click.Context, param: click.Parameter, value: str | None
) -> tuple[float, float] | None:
    """Click callback for 'a,b' options."""
    if value is None:
        return None
    try:
        a, b = (float(s) for s in value.split(","))
    except ValueError:
        raise click.BadParameter(f"expected two comma-separated numbers, got {value!r}") from None
    return a, b
