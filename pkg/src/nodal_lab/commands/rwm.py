"""rwm commands - Sample Gaussian random waves and their nodal statistics."""

from pathlib import Path

import click
import numpy as np

from nodal_lab.commands.common import (
    MEASURE,
    OUTPUT,
    SEED,
    Run,
    done,
    guarded,
    open_measure,
)
from nodal_lab.gaussian import (
    DEFAULT_ATOMS,
    discretize_measure,
    export_samples,
    mc_nodal_statistics,
    sample_field,
)
from nodal_lab.kacrice import berry_variance, physical_length_constant
from nodal_lab.measure import moment_matrix
from nodal_lab.models import KacRiceInput
from nodal_lab.nodal import DEFAULT_REFINE_TOL, MIN_RESOLUTION, UNIT_BOX, nodal_length

SCALE = click.option("--R", "scale", type=float, required=True, help="Frequency scale R")
ATOMS = click.option(
    "--atoms",
    type=int,
    default=DEFAULT_ATOMS,
    show_default=True,
    help="Atoms used to discretise continuous measures",
)


def _z_score(mean: float, expected: float, se: float) -> float:
    return (mean - expected) / se if se > 0 else 0.0


@click.group("rwm")
def rwm_group() -> None:
    """Random wave model: Gaussian fields with a given spectral measure."""


@rwm_group.command("sample")
@MEASURE
@SCALE
@SEED
@ATOMS
@click.option(
    "--grid",
    type=click.IntRange(min=2),
    default=128,
    show_default=True,
    help="Grid points per side on [-1/2, 1/2]^2",
)
@OUTPUT
@click.pass_context
def sample_cmd(
    ctx: click.Context,
    measure_name: str,
    scale: float,
    seed: int,
    atoms: int,
    grid: int,
    output: Path | None,
) -> None:
    """One realisation of F_mu(R .) on the unit square, as plot-ready CSV."""
    run = Run(ctx, dict(ctx.params), seed=seed)
    with guarded():
        mu = discretize_measure(open_measure(measure_name), atoms)
        field = sample_field(mu, scale, seed).field
        axis = np.linspace(-0.5, 0.5, grid)
        values = field.grid(axis, axis)
        estimate = nodal_length(field, UNIT_BOX)
    run.table(
        output,
        ("y1", "y2", "value"),
        (
            (float(axis[i]), float(axis[j]), float(values[i, j]))
            for i in range(grid)
            for j in range(grid)
        ),
    )
    run.summary(output, {"length": estimate.length, "converged": estimate.converged})
    done(f"sample nodal length {estimate.length:.6f} (L/R = {estimate.length / scale:.6f})")


@rwm_group.command("stats")
@MEASURE
@SCALE
@click.option(
    "--n",
    "n_samples",
    type=int,
    default=200,
    show_default=True,
    help="Number of realisations",
)
@SEED
@click.option("--resolution", type=int, default=MIN_RESOLUTION, show_default=True)
@click.option("--refine-tol", type=float, default=DEFAULT_REFINE_TOL, show_default=True)
@ATOMS
@click.option(
    "--output",
    "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    required=True,
    help="Per-sample CSV; the JSON summary is written beside it",
)
@click.pass_context
def stats_cmd(
    ctx: click.Context,
    measure_name: str,
    scale: float,
    n_samples: int,
    seed: int,
    resolution: int,
    refine_tol: float,
    atoms: int,
    output: Path,
) -> None:
    """Mean and variance of the nodal length of F_mu(R .) on a unit square.

    Exits with code 3 when some samples did not converge; all rows are
    still written.
    """
    run = Run(ctx, dict(ctx.params), seed=seed)
    with guarded():
        mu = open_measure(measure_name)
        matrix = moment_matrix(mu)
        stats = mc_nodal_statistics(
            mu,
            scale,
            n_samples,
            seed,
            resolution,
            refine_tol,
            atoms,
            threads=run.threads,
        )
        reference = physical_length_constant(
            KacRiceInput(alpha=matrix.alpha, beta=matrix.beta)
        )
    export_samples(stats, output, run.header)
    summary = {
        "measure": measure_name,
        "R": scale,
        "n": n_samples,
        "mean": stats.mean,
        "var": stats.variance,
        "se": stats.standard_error,
        "var_over_R2": stats.variance / scale**2,
        "expected_mean": reference * scale,
        "z_score": _z_score(stats.mean, reference * scale, stats.standard_error),
        "unconverged": stats.unconverged,
    }
    if scale > 1:
        summary["berry_variance"] = berry_variance(scale)
    run.summary(output, summary)
    done(
        f"mean {stats.mean:.6f} +/- {stats.standard_error:.6f} "
        f"(expected {reference * scale:.6f}), var/R^2 {stats.variance / scale**2:.6g}",
        incomplete=stats.unconverged > 0,
    )
