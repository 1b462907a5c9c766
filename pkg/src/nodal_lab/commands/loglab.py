"""loglab commands - Log-integrability, small values and Planck-scale lengths."""

import logging
from pathlib import Path

import click

from nodal_lab.commands.common import OUTPUT, SEED, SPEC, Run, done, guarded
from nodal_lab.eigenfunction import load_spec, to_field
from nodal_lab.loglab import (
    DEFAULT_DEPTH,
    LOG_RESOLUTION,
    MAX_DEPTH,
    SMALL_VALUE_RESOLUTION,
    export_distribution,
    export_moments,
    fit_small_value_decay,
    length_moments,
    log_moment,
    planck_distribution,
    small_value_profile,
)
from nodal_lab.nodal import MIN_RESOLUTION

logger = logging.getLogger(__name__)

SCALE = click.option(
    "--R", "scale", type=float, required=True, help="Window size in Planck units"
)
N_X = click.option(
    "--n-x", "n_x", type=int, default=300, show_default=True, help="Window centres"
)
RESOLUTION = click.option(
    "--resolution", type=int, default=MIN_RESOLUTION, show_default=True
)
REQUIRED_OUTPUT = click.option(
    "--output",
    "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    required=True,
    help="CSV file; the JSON summary is written beside it",
)


@click.group("loglab")
def loglab_group() -> None:
    """Empirical log-integrability and Planck-scale length experiments."""


@loglab_group.command("logmoment")
@SPEC
@click.option("--p", type=click.IntRange(min=1), default=2, show_default=True)
@click.option("--resolution", type=int, default=LOG_RESOLUTION, show_default=True)
@click.option(
    "--max-depth",
    type=click.IntRange(0, MAX_DEPTH),
    default=DEFAULT_DEPTH,
    show_default=True,
    help="Dyadic subdivision depth near zeros",
)
@OUTPUT
@click.pass_context
def logmoment_cmd(
    ctx: click.Context,
    spec_path: Path,
    p: int,
    resolution: int,
    max_depth: int,
    output: Path | None,
) -> None:
    """int_T2 |log |f||^p by quadrature with subdivision near the nodal set.

    The CSV lists the estimate after each subdivision depth.
    """
    run = Run(ctx, dict(ctx.params))
    with guarded():
        report = log_moment(to_field(load_spec(spec_path)), p, None, resolution, max_depth)
    run.table(output, ("depth", "estimate"), enumerate(report.history))
    run.summary(output, report.model_dump(mode="json"))
    rel = report.error_estimate / report.value if report.value > 0 else 0.0
    done(
        f"log moment p={p}: {report.value:.6f} (relative change {rel:.2%}, "
        f"{report.capped_fraction:.2%} of the area unresolved)",
        incomplete=not report.converged,
    )


@loglab_group.command("smallvalue")
@SPEC
@click.option(
    "--delta",
    "deltas",
    type=float,
    multiple=True,
    default=(1e-1, 3e-2, 1e-2, 3e-3, 1e-3),
    show_default=True,
    help="Threshold (repeatable)",
)
@click.option(
    "--resolution", type=int, default=SMALL_VALUE_RESOLUTION, show_default=True
)
@click.option("--depth", type=click.IntRange(0, MAX_DEPTH), default=4, show_default=True)
@OUTPUT
@click.pass_context
def smallvalue_cmd(
    ctx: click.Context,
    spec_path: Path,
    deltas: tuple[float, ...],
    resolution: int,
    depth: int,
    output: Path | None,
) -> None:
    """vol{|f| <= delta} for several delta, with a power-of-log decay fit."""
    run = Run(ctx, dict(ctx.params))
    ordered = sorted(deltas)
    with guarded():
        volumes = small_value_profile(
            to_field(load_spec(spec_path)), ordered, None, resolution, depth
        )
    run.table(output, ("delta", "volume"), zip(ordered, volumes, strict=True))
    fit = None
    usable = [(d, v) for d, v in zip(ordered, volumes, strict=True) if 0 < v and d < 1]
    if len(usable) >= 2:
        with guarded():
            fit = fit_small_value_decay([d for d, _ in usable], [v for _, v in usable])
    run.summary(
        output,
        {"deltas": ordered, "volumes": volumes, "fit": fit.model_dump() if fit else None},
    )
    if fit is None:
        done(f"{len(ordered)} thresholds; too few nonzero volumes to fit a decay")
    else:
        done(f"vol(|f| <= delta) ~ (-log delta)^(-{fit.exponent:.3f})")


@loglab_group.command("lengthmoment")
@SPEC
@SCALE
@click.option(
    "--p",
    "orders",
    type=click.IntRange(min=1),
    multiple=True,
    default=(1, 2, 3),
    show_default=True,
    help="Moment order (repeatable)",
)
@N_X
@SEED
@RESOLUTION
@REQUIRED_OUTPUT
@click.pass_context
def lengthmoment_cmd(
    ctx: click.Context,
    spec_path: Path,
    scale: float,
    orders: tuple[int, ...],
    n_x: int,
    seed: int,
    resolution: int,
    output: Path,
) -> None:
    """Monte-Carlo moments of L(F_x) over uniform centres x."""
    run = Run(ctx, dict(ctx.params), seed=seed)
    ps = sorted(set(orders))
    with guarded():
        spec = load_spec(spec_path)
        reports = length_moments(spec, scale, ps, n_x, seed, resolution, threads=run.threads)
    export_moments(reports, spec.lambda_, output, run.header, run.meta)
    norms = [r.value ** (1.0 / r.p) for r in reports]
    ordered = all(a <= b * (1 + 1e-12) for a, b in zip(norms, norms[1:], strict=False))
    if not ordered:
        logger.warning("moment norms %s are not nondecreasing in p", norms)
    converged = all(r.converged for r in reports)
    done(
        "E L^p: "
        + ", ".join(f"p={r.p}: {r.value:.6g} +/- {r.error_estimate:.2g}" for r in reports),
        incomplete=not converged,
    )


@loglab_group.command("distribution")
@SPEC
@SCALE
@click.option(
    "--n-x", "n_x", type=int, default=1000, show_default=True, help="Window centres"
)
@SEED
@RESOLUTION
@REQUIRED_OUTPUT
@click.pass_context
def distribution_cmd(
    ctx: click.Context,
    spec_path: Path,
    scale: float,
    n_x: int,
    seed: int,
    resolution: int,
    output: Path,
) -> None:
    """Distribution of L(F_x)/R against the random-wave expectation."""
    run = Run(ctx, dict(ctx.params), seed=seed)
    with guarded():
        dist = planck_distribution(
            load_spec(spec_path), scale, n_x, seed, resolution, run.threads
        )
    export_distribution(dist, output, run.header, run.meta)
    fractions = ", ".join(f"{eps}: {frac:.3f}" for eps, frac in dist.equidist.items())
    done(
        f"mean L/R {dist.mean:.6f} (expected {dist.reference:.6f}); "
        f"far fractions {fractions}",
        incomplete=dist.unconverged > 0,
    )
