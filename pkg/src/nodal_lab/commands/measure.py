"""measure commands - Fourier moments and covariance of spectral measures."""

from pathlib import Path

import click

from nodal_lab.commands.common import (
    MEASURE,
    OUTPUT,
    Run,
    done,
    guarded,
    open_measure,
    parse_pair,
)
from nodal_lab.measure import (
    covariance,
    covariance_derivatives,
    fourier_moment,
    moment_matrix,
)


def _parse_lags(
    ctx: click.Context, param: click.Parameter, values: tuple[str, ...]
) -> list[tuple[float, float] | None]:
    return [parse_pair(ctx, param, v) for v in values]


@click.group("measure")
def measure_group() -> None:
    """Probability measures on the unit circle of directions."""


@measure_group.command("moments")
@MEASURE
@click.option(
    "--k",
    "orders",
    type=int,
    multiple=True,
    default=(2,),
    show_default=True,
    help="Moment order (repeatable)",
)
@OUTPUT
@click.pass_context
def moments_cmd(
    ctx: click.Context, measure_name: str, orders: tuple[int, ...], output: Path | None
) -> None:
    """Fourier moments mu_hat(k) and the gradient moment matrix."""
    run = Run(ctx, dict(ctx.params))
    with guarded():
        mu = open_measure(measure_name)
        moments = [(k, fourier_moment(mu, k)) for k in orders]
        matrix = moment_matrix(mu)
    run.table(
        output,
        ("k", "re", "im", "abs"),
        ((k, m.re, m.im, abs(m)) for k, m in moments),
    )
    run.summary(
        output,
        {
            "alpha": matrix.alpha,
            "beta": matrix.beta,
            "det": matrix.det,
            "degenerate": matrix.degenerate,
        },
    )
    done(
        f"mu_hat(2) = {matrix.alpha:.6f}{matrix.beta:+.6f}i, det L = {matrix.det:.6f}"
        + (" (degenerate)" if matrix.degenerate else "")
    )


@measure_group.command("covariance")
@MEASURE
@click.option(
    "--w",
    "lags",
    type=str,
    multiple=True,
    required=True,
    callback=_parse_lags,
    help="Lag 'w1,w2' (repeatable)",
)
@OUTPUT
@click.pass_context
def covariance_cmd(
    ctx: click.Context,
    measure_name: str,
    lags: list[tuple[float, float]],
    output: Path | None,
) -> None:
    """Covariance r(w) with its gradient and Hessian."""
    run = Run(ctx, dict(ctx.params))
    rows = []
    with guarded():
        mu = open_measure(measure_name)
        for w in lags:
            grad, hess = covariance_derivatives(mu, w)
            rows.append(
                (
                    w[0],
                    w[1],
                    covariance(mu, w),
                    float(grad[0]),
                    float(grad[1]),
                    float(hess[0, 0]),
                    float(hess[0, 1]),
                    float(hess[1, 1]),
                )
            )
    run.table(output, ("w1", "w2", "r", "dr1", "dr2", "h11", "h12", "h22"), rows)
    done(f"covariance at {len(rows)} lags")
