"""nodal commands - Nodal lengths, Planck windows, doubling and locality."""

from pathlib import Path

import click

from nodal_lab.commands.common import (
    OUTPUT,
    SEED,
    SPEC,
    Run,
    done,
    guarded,
    parse_pair,
)
from nodal_lab.eigenfunction import load_spec, to_field
from nodal_lab.errors import InvalidInputError
from nodal_lab.models import Disk, FullTorus, NodalEstimate, Region, Square
from nodal_lab.nodal import (
    DEFAULT_REFINE_TOL,
    MAX_RESOLUTION,
    MIN_RESOLUTION,
    doubling_survey,
    locality_check,
    nodal_length,
    nodal_length_planck,
)

RESOLUTION = click.option(
    "--resolution",
    type=int,
    default=MIN_RESOLUTION,
    show_default=True,
    help="Starting grid cells per side (power of two)",
)
SCALE = click.option(
    "--R", "scale", type=float, required=True, help="Window size in Planck units"
)


def _region(
    kind: str,
    center: tuple[float, float] | None,
    half_side: float,
    radius: float | None,
) -> Region:
    if kind == "torus":
        return FullTorus()
    c = center or (0.5, 0.5)
    if kind == "square":
        return Square(center=c, half_side=half_side)
    if radius is None:
        raise InvalidInputError("a disk region needs --radius")
    return Disk(center=c, radius=radius, complement=kind == "disk-complement")


def _history_rows(estimate: NodalEstimate) -> list[tuple[int, float]]:
    return [(n, length) for n, length in estimate.history]


@click.group("nodal")
def nodal_group() -> None:
    """Nodal-line length of eigenfunctions and their Planck windows."""


@nodal_group.command("length")
@SPEC
@click.option(
    "--region",
    "region_kind",
    type=click.Choice(["torus", "square", "disk", "disk-complement"]),
    default="torus",
    show_default=True,
)
@click.option("--center", type=str, default=None, callback=parse_pair, help="'x1,x2'")
@click.option("--half-side", type=float, default=0.5, show_default=True)
@click.option("--radius", type=float, default=None)
@RESOLUTION
@click.option("--refine-tol", type=float, default=DEFAULT_REFINE_TOL, show_default=True)
@click.option("--max-resolution", type=int, default=MAX_RESOLUTION, show_default=True)
@OUTPUT
@click.pass_context
def length_cmd(
    ctx: click.Context,
    spec_path: Path,
    region_kind: str,
    center: tuple[float, float] | None,
    half_side: float,
    radius: float | None,
    resolution: int,
    refine_tol: float,
    max_resolution: int,
    output: Path | None,
) -> None:
    """Length of {f = 0} on the torus, a square, a disk or a disk complement.

    A disk complement is the covering square of the disk minus the disk.

    The CSV lists the estimate at every resolution of the refinement.
    """
    run = Run(ctx, dict(ctx.params))
    with guarded():
        spec = load_spec(spec_path)
        region = _region(region_kind, center, half_side, radius)
        estimate = nodal_length(
            to_field(spec), region, resolution, refine_tol, max_resolution
        )
    run.table(output, ("resolution", "length"), _history_rows(estimate))
    run.summary(output, estimate.model_dump(mode="json"))
    done(
        f"nodal length {estimate.length:.6f} at resolution {estimate.resolution}"
        + (f" ({estimate.note})" if estimate.note else ""),
        incomplete=not estimate.converged,
    )


@nodal_group.command("planck")
@SPEC
@click.option("--x", "x", type=str, required=True, callback=parse_pair, help="'x1,x2'")
@SCALE
@RESOLUTION
@OUTPUT
@click.pass_context
def planck_cmd(
    ctx: click.Context,
    spec_path: Path,
    x: tuple[float, float],
    scale: float,
    resolution: int,
    output: Path | None,
) -> None:
    """L(F_x) of the window of size R centred at x."""
    run = Run(ctx, dict(ctx.params))
    with guarded():
        estimate = nodal_length_planck(load_spec(spec_path), x, scale, resolution)
    run.table(output, ("resolution", "length"), _history_rows(estimate))
    run.summary(output, estimate.model_dump(mode="json"))
    done(
        f"L(F_x) = {estimate.length:.6f} (L/R = {estimate.length / scale:.6f})",
        incomplete=not estimate.converged,
    )


@nodal_group.command("doubling")
@SPEC
@SCALE
@click.option("--n-boxes", type=click.IntRange(min=3), default=50, show_default=True)
@SEED
@RESOLUTION
@OUTPUT
@click.pass_context
def doubling_cmd(
    ctx: click.Context,
    spec_path: Path,
    scale: float,
    n_boxes: int,
    seed: int,
    resolution: int,
    output: Path | None,
) -> None:
    """Doubling ratios of random Planck windows against their nodal lengths."""
    run = Run(ctx, dict(ctx.params), seed=seed)
    with guarded():
        survey = doubling_survey(
            load_spec(spec_path), scale, n_boxes, seed, resolution, run.threads
        )
    run.table(
        output,
        ("box", "doubling_ratio", "length"),
        (
            (i, r, length)
            for i, (r, length) in enumerate(
                zip(survey.ratios, survey.lengths, strict=True)
            )
        ),
    )
    run.summary(output, {"spearman": survey.spearman, "p_value": survey.p_value})
    done(f"Spearman rho = {survey.spearman:.4f} (p = {survey.p_value:.3g})")


@nodal_group.command("locality")
@SPEC
@click.option("--center", type=str, default="0.5,0.5", callback=parse_pair, help="'x1,x2'")
@click.option("--radius", type=float, required=True, help="Ball radius")
@SCALE
@click.option("--n-mc", type=click.IntRange(min=1), default=400, show_default=True)
@SEED
@RESOLUTION
@OUTPUT
@click.pass_context
def locality_cmd(
    ctx: click.Context,
    spec_path: Path,
    center: tuple[float, float],
    radius: float,
    scale: float,
    n_mc: int,
    seed: int,
    resolution: int,
    output: Path | None,
) -> None:
    """Compare L(f, B) with the integral of window lengths over B."""
    run = Run(ctx, dict(ctx.params), seed=seed)
    with guarded():
        report = locality_check(
            load_spec(spec_path),
            Disk(center=center, radius=radius),
            scale,
            n_mc,
            seed,
            resolution,
            threads=run.threads,
        )
    run.table(
        output,
        ("lhs", "rhs", "discrepancy", "standard_error", "lower", "upper"),
        [
            (
                report.lhs,
                report.rhs,
                report.discrepancy,
                report.standard_error,
                report.lower,
                report.upper,
            )
        ],
    )
    run.summary(output, report.model_dump(mode="json"))
    done(
        f"L(f,B) = {report.lhs:.6f}, window integral = {report.rhs:.6f} "
        f"(relative discrepancy {report.discrepancy:.4f})"
    )
