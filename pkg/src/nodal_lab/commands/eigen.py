"""eigen commands - Build, evaluate and inspect toral eigenfunctions."""

import sys
from pathlib import Path

import click
import numpy as np

from nodal_lab.commands.common import (
    OUTPUT,
    SPEC,
    Run,
    console,
    done,
    guarded,
    parse_pair,
)
from nodal_lab.eigenfunction import (
    FLATNESS_CONSTANT,
    build_arc_bourgain,
    build_bourgain,
    build_random_flat,
    build_single_pair,
    evaluate,
    evaluate_gradient,
    flatness_margin,
    load_spec,
    save_spec,
)
from nodal_lab.errors import InvalidInputError
from nodal_lab.models import EigenfunctionSpec, LatticePoint

KINDS = ("bourgain", "arc-bourgain", "random-flat", "single-pair")


def _parse_arcs(
    ctx: click.Context, param: click.Parameter, value: str
) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in value.split(","))
    except ValueError:
        raise click.BadParameter(
            f"expected comma-separated arc numbers, got {value!r}"
        ) from None


def _parse_points(
    ctx: click.Context, param: click.Parameter, values: tuple[str, ...]
) -> list[tuple[float, float] | None]:
    return [parse_pair(ctx, param, v) for v in values]


def _build(
    kind: str,
    lam: int | None,
    arcs: tuple[int, ...],
    epsilon: float,
    seed: int | None,
    xi: tuple[float, float] | None,
) -> EigenfunctionSpec:
    if kind == "single-pair":
        if xi is None:
            raise InvalidInputError("single-pair needs --xi")
        return build_single_pair(LatticePoint(int(xi[0]), int(xi[1])))
    if lam is None:
        raise InvalidInputError(f"{kind} needs --lambda")
    if kind == "bourgain":
        return build_bourgain(lam)
    if kind == "arc-bourgain":
        return build_arc_bourgain(lam, arcs)
    if seed is None:
        raise InvalidInputError("random-flat needs --seed")
    return build_random_flat(lam, epsilon, seed)


@click.group("eigen")
def eigen_group() -> None:
    """Toral Laplace eigenfunctions given by their Fourier coefficients."""


@eigen_group.command("build")
@click.option(
    "--kind",
    type=click.Choice(KINDS),
    default="bourgain",
    show_default=True,
    help="Coefficient pattern",
)
@click.option("--lambda", "lam", type=int, default=None, help="Eigenvalue lambda")
@click.option(
    "--arcs",
    type=str,
    default="1,5",
    show_default=True,
    callback=_parse_arcs,
    help="Arc numbers 1..8 for arc-bourgain (closed under k -> k+4)",
)
@click.option(
    "--epsilon", type=float, default=0.0, show_default=True, help="Flatness exponent"
)
@click.option("--seed", type=int, default=None, help="Seed for random-flat")
@click.option("--xi", type=str, default=None, callback=parse_pair, help="Frequency 'x1,x2'")
@click.option(
    "--output",
    "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Spec JSON file (stdout if omitted)",
)
@click.pass_context
def build_cmd(
    ctx: click.Context,
    kind: str,
    lam: int | None,
    arcs: tuple[int, ...],
    epsilon: float,
    seed: int | None,
    xi: tuple[float, float] | None,
    output: Path | None,
) -> None:
    """Build an eigenfunction spec and write it as JSON."""
    with guarded():
        spec = _build(kind, lam, arcs, epsilon, seed, xi)
    if output is None:
        sys.stdout.write(spec.model_dump_json(by_alias=True, indent=2) + "\n")
    else:
        output.parent.mkdir(parents=True, exist_ok=True)
        save_spec(spec, output)
        console.print(f"  Wrote [dim]{output}[/dim]")
    done(
        f"{kind} spec: lambda={spec.lambda_}, {len(spec.coefficients)} coefficients, "
        f"||f||^2={spec.l2_norm_squared:.12f}"
    )


@eigen_group.command("eval")
@SPEC
@click.option(
    "--point",
    "points",
    type=str,
    multiple=True,
    callback=_parse_points,
    help="Evaluation point 'x1,x2' (repeatable)",
)
@click.option(
    "--grid",
    type=click.IntRange(min=1),
    default=None,
    help="Evaluate on an n x n grid of [0,1)^2 instead",
)
@OUTPUT
@click.pass_context
def eval_cmd(
    ctx: click.Context,
    spec_path: Path,
    points: list[tuple[float, float]],
    grid: int | None,
    output: Path | None,
) -> None:
    """Values and gradients of f at points or on a grid."""
    run = Run(ctx, {"spec": spec_path, "points": points, "grid": grid, "output": output})
    with guarded():
        spec = load_spec(spec_path)
        if grid is not None:
            axis = np.arange(grid) / grid
            g1, g2 = np.meshgrid(axis, axis, indexing="ij")
            xs = np.column_stack([g1.ravel(), g2.ravel()])
        elif points:
            xs = np.array(points, dtype=float)
        else:
            raise InvalidInputError("give --point or --grid")
        values = evaluate(spec, xs)
        grads = evaluate_gradient(spec, xs)
    run.table(
        output,
        ("x1", "x2", "value", "grad1", "grad2"),
        (
            (float(x[0]), float(x[1]), float(v), float(g[0]), float(g[1]))
            for x, v, g in zip(xs, values, grads, strict=True)
        ),
    )
    done(f"evaluated {len(xs)} points; max |f| = {float(np.max(np.abs(values))):.6g}")


@eigen_group.command("flatness")
@SPEC
@click.option(
    "--epsilon", type=float, default=0.0, show_default=True, help="Flatness exponent"
)
@OUTPUT
@click.pass_context
def flatness_cmd(
    ctx: click.Context, spec_path: Path, epsilon: float, output: Path | None
) -> None:
    """max |a_xi|^2 N^(1 - epsilon), flat when at most 100."""
    run = Run(ctx, dict(ctx.params))
    with guarded():
        spec = load_spec(spec_path)
        margin = flatness_margin(spec, epsilon)
    flat = margin <= FLATNESS_CONSTANT
    row = (spec.lambda_, len(spec.coefficients), epsilon, margin, flat)
    columns = ("lambda", "n_points", "epsilon", "margin", "flat")
    run.table(output, columns, [row])
    run.summary(output, dict(zip(columns, row, strict=True)))
    verdict = "flat" if flat else "not flat"
    done(f"flatness margin {margin:.6g} ({verdict} at epsilon={epsilon})")
