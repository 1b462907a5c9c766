"""kacrice commands - Kac-Rice constants for a given mu_hat(2)."""

from pathlib import Path
from typing import cast

import click

from nodal_lab.commands.common import OUTPUT, Run, done, guarded
from nodal_lab.kacrice import (
    C1Path,
    berry_variance,
    c1_monte_carlo,
    expected_length_constant,
    physical_length_constant,
    variance_constant_formula,
)
from nodal_lab.models import KacRiceInput

ALPHA = click.option("--alpha", type=float, default=0.0, show_default=True)
BETA = click.option("--beta", type=float, default=0.0, show_default=True)


def _input(alpha: float, beta: float) -> KacRiceInput:
    return KacRiceInput(alpha=alpha, beta=beta)


@click.group("kacrice")
def kacrice_group() -> None:
    """Kac-Rice constants of stationary fields with mu_hat(2) = alpha + i beta."""


@kacrice_group.command("c1")
@ALPHA
@BETA
@click.option(
    "--path",
    type=click.Choice(["auto", "closed-form", "general"]),
    default="auto",
    show_default=True,
    help="Closed form (beta = 0) or the Gaussian-expectation integral",
)
@click.option(
    "--mc",
    "n_draws",
    type=click.IntRange(min=2),
    default=None,
    help="Also estimate c1 from this many Gaussian draws",
)
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for --mc")
@OUTPUT
@click.pass_context
def c1_cmd(
    ctx: click.Context,
    alpha: float,
    beta: float,
    path: str,
    n_draws: int | None,
    seed: int,
    output: Path | None,
) -> None:
    """Expected nodal length constant c1 (1/(2 sqrt 2) at alpha = beta = 0)."""
    run = Run(ctx, dict(ctx.params), seed=seed if n_draws else None)
    with guarded():
        inp = _input(alpha, beta)
        c1 = expected_length_constant(inp, cast(C1Path, path))
        physical = physical_length_constant(inp)
        estimate = c1_monte_carlo(inp, n_draws, seed) if n_draws else None
    columns = ["alpha", "beta", "c1", "two_pi_c1"]
    row: list[float] = [alpha, beta, c1, physical]
    if estimate is not None:
        columns += ["mc_c1", "mc_standard_error"]
        row += [estimate[0], estimate[1]]
    run.table(output, columns, [row])
    run.summary(output, dict(zip(columns, row, strict=True)))
    if estimate is not None:
        done(f"c1 = {c1!r}; Monte Carlo {estimate[0]:.6f} +/- {estimate[1]:.6f}")
    else:
        done(f"c1 = {c1!r}; 2 pi c1 = {physical!r}")


@kacrice_group.command("c2-formula")
@ALPHA
@BETA
@OUTPUT
@click.pass_context
def c2_formula_cmd(
    ctx: click.Context, alpha: float, beta: float, output: Path | None
) -> None:
    """The closed-form variance expression, evaluated as written."""
    run = Run(ctx, dict(ctx.params))
    with guarded():
        value = variance_constant_formula(_input(alpha, beta))
    run.table(output, ("alpha", "beta", "formula"), [(alpha, beta, value)])
    run.summary(output, {"alpha": alpha, "beta": beta, "formula": value})
    done(f"variance formula = {value!r}")


@kacrice_group.command("berry")
@click.option("--R", "scale", type=float, required=True)
@OUTPUT
@click.pass_context
def berry_cmd(ctx: click.Context, scale: float, output: Path | None) -> None:
    """Berry's variance log(R) / (512 pi) for the isotropic random wave."""
    run = Run(ctx, dict(ctx.params))
    with guarded():
        value = berry_variance(scale)
    run.table(output, ("R", "variance"), [(scale, value)])
    run.summary(output, {"R": scale, "variance": value})
    done(f"log(R)/(512 pi) = {value!r}")
