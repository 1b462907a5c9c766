"""lattice commands - Lattice points, correlations and admissibility scans."""

from pathlib import Path
from typing import Any, cast

import click

from nodal_lab.commands.common import OUTPUT, Run, done, guarded
from nodal_lab.lattice import (
    DEFAULT_BUDGET,
    Strategy,
    find_correlations,
    find_semi_correlations,
    lattice_points,
    min_quasi_correlation,
    scan_admissible_eigenvalues,
)
from nodal_lab.models import Axis, CorrelationReport, LatticePoint

LAMBDA = click.option(
    "--lambda", "lam", type=int, required=True, help="Eigenvalue lambda"
)
ELL = click.option(
    "--ell",
    type=click.IntRange(min=1),
    default=1,
    show_default=True,
    help="Half the number of summands",
)
BUDGET = click.option(
    "--budget",
    type=int,
    default=DEFAULT_BUDGET,
    show_default=True,
    help="Maximum raw multisets to enumerate",
)
STRATEGY = click.option(
    "--strategy",
    type=click.Choice(["auto", "direct", "meet-in-the-middle"]),
    default="auto",
    show_default=True,
)


def _format_tuple(values: tuple[Any, ...]) -> str:
    if values and isinstance(values[0], LatticePoint):
        return " ".join(f"({p.x1},{p.x2})" for p in values)
    return " ".join(str(v) for v in values)


def _write_report(run: Run, report: CorrelationReport, output: Path | None) -> None:
    run.table(
        output,
        ("index", "tuple"),
        ((i, _format_tuple(t)) for i, t in enumerate(report.nontrivial_tuples)),
    )
    run.summary(output, report.model_dump(mode="json", by_alias=True))


@click.group("lattice")
def lattice_group() -> None:
    """Lattice points on circles and their additive structure."""


@lattice_group.command("points")
@LAMBDA
@OUTPUT
@click.pass_context
def points_cmd(ctx: click.Context, lam: int, output: Path | None) -> None:
    """List the lattice points with |xi|^2 = lambda, sorted by angle."""
    run = Run(ctx, {"lam": lam, "output": output})
    with guarded():
        circle = lattice_points(lam)
    run.table(
        output,
        ("x1", "x2", "angle"),
        ((p.x1, p.x2, p.angle) for p in circle.points),
    )
    run.summary(output, {"lambda": lam, "multiplicity": circle.multiplicity})
    done(f"{circle.multiplicity} lattice points on |xi|^2 = {lam}")


@lattice_group.command("correlations")
@LAMBDA
@ELL
@BUDGET
@STRATEGY
@OUTPUT
@click.pass_context
def correlations_cmd(
    ctx: click.Context,
    lam: int,
    ell: int,
    budget: int,
    strategy: str,
    output: Path | None,
) -> None:
    """Nontrivial vanishing sums of 2*ell lattice points."""
    run = Run(
        ctx,
        {"lam": lam, "ell": ell, "budget": budget, "strategy": strategy, "output": output},
    )
    with guarded():
        report = find_correlations(lam, ell, budget, cast(Strategy, strategy))
    _write_report(run, report, output)
    done(
        f"{len(report.nontrivial_tuples)} nontrivial {2 * ell}-correlations "
        f"({report.strategy})"
    )


@lattice_group.command("semi")
@LAMBDA
@ELL
@click.option(
    "--axis",
    type=click.Choice([Axis.FIRST.value, Axis.SECOND.value]),
    default=Axis.FIRST.value,
    show_default=True,
)
@BUDGET
@STRATEGY
@OUTPUT
@click.pass_context
def semi_cmd(
    ctx: click.Context,
    lam: int,
    ell: int,
    axis: str,
    budget: int,
    strategy: str,
    output: Path | None,
) -> None:
    """Nontrivial vanishing sums of 2*ell coordinate projections."""
    params = {
        "lam": lam,
        "ell": ell,
        "axis": axis,
        "budget": budget,
        "strategy": strategy,
        "output": output,
    }
    run = Run(ctx, params)
    with guarded():
        report = find_semi_correlations(
            lam, ell, Axis(axis), budget, cast(Strategy, strategy)
        )
    _write_report(run, report, output)
    done(
        f"{len(report.nontrivial_tuples)} nontrivial {2 * ell}-semi-correlations "
        f"on the {axis} axis"
    )


@lattice_group.command("quasi")
@LAMBDA
@ELL
@click.option(
    "--axis",
    type=click.Choice([a.value for a in Axis]),
    default=Axis.FIRST.value,
    show_default=True,
)
@click.option(
    "--delta", type=float, default=None, help="Also report min / lambda^(-1/2 + delta)"
)
@BUDGET
@STRATEGY
@OUTPUT
@click.pass_context
def quasi_cmd(
    ctx: click.Context,
    lam: int,
    ell: int,
    axis: str,
    delta: float | None,
    budget: int,
    strategy: str,
    output: Path | None,
) -> None:
    """Smallest nonzero |sum| over 2*ell-multisets of points or projections."""
    params = {
        "lam": lam,
        "ell": ell,
        "axis": axis,
        "delta": delta,
        "budget": budget,
        "strategy": strategy,
        "output": output,
    }
    run = Run(ctx, params)
    with guarded():
        report = min_quasi_correlation(
            lam, ell, Axis(axis), delta, budget, cast(Strategy, strategy)
        )
    ratio = "" if report.ratio_to_bound is None else report.ratio_to_bound
    run.table(
        output,
        ("lambda", "ell", "axis", "min_nonzero_abs", "ratio_to_bound"),
        [(lam, ell, axis, report.min_nonzero_abs, ratio)],
    )
    run.summary(output, report.model_dump(mode="json", by_alias=True))
    done(f"min nonzero |sum| = {report.min_nonzero_abs:.6g}")


@lattice_group.command("scan")
@click.option(
    "--x-bound",
    "x_bound",
    type=click.IntRange(min=0),
    required=True,
    help="Scan every lambda <= X in S",
)
@ELL
@BUDGET
@click.option(
    "--workers",
    type=click.IntRange(min=1),
    default=None,
    help="Worker processes (default: the global thread count)",
)
@OUTPUT
@click.pass_context
def scan_cmd(
    ctx: click.Context,
    x_bound: int,
    ell: int,
    budget: int,
    workers: int | None,
    output: Path | None,
) -> None:
    """Flag eigenvalues carrying nontrivial semi-correlations.

    Exits with code 3 when the budget truncates the scan; the rows computed
    so far are still written.
    """
    run = Run(ctx, {"x_bound": x_bound, "ell": ell, "budget": budget, "output": output})
    with guarded():
        report = scan_admissible_eigenvalues(x_bound, ell, budget, workers or run.threads)
    run.table(
        output,
        ("lambda", "has_nontrivial_semi_correlation", "running_density"),
        (
            (e.lambda_, e.has_nontrivial_semi_correlation, e.running_density)
            for e in report.entries
        ),
    )
    run.summary(output, report.model_dump(mode="json", by_alias=True))
    if report.truncated:
        done(f"scan truncated after {len(report.entries)} eigenvalues", incomplete=True)
    last = report.entries[-1].running_density if report.entries else 0.0
    done(f"{len(report.entries)} eigenvalues scanned; running density {last:.4f}")
