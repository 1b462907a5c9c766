"""Empirical checks of log-integrability, small values and Planck-scale nodal lengths."""

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from scipy import special

from nodal_lab.eigenfunction import restrict
from nodal_lab.errors import DegenerateMeasureError, InvalidInputError
from nodal_lab.fields import Field
from nodal_lab.kacrice import physical_length_constant
from nodal_lab.measure import from_eigenfunction, moment_matrix
from nodal_lab.models import (
    Disk,
    EigenfunctionSpec,
    FullTorus,
    KacRiceInput,
    LengthDistribution,
    MomentReport,
    PlanckWindow,
    SmallValueFit,
    Square,
)
from nodal_lab.nodal import MIN_RESOLUTION, UNIT_BOX, nodal_length
from nodal_lab.utils import derive_seed, parallel_map, write_csv, write_json

logger = logging.getLogger(__name__)

LOG_RESOLUTION = 256
SMALL_VALUE_RESOLUTION = 512
DEFAULT_DEPTH = 8
MAX_DEPTH = 12
CAPPED_AREA_LIMIT = 0.01
LOG_TOLERANCE = 0.01
ABS_FLOOR = 1e-300
# Cells whose linear model varies less than this, relative to |f(centre)|, use the midpoint.
LINEAR_FLOOR = 1e-8
# Below this ratio of the two value spreads the trapezoid is treated as flat.
THIN_RATIO = 1e-5
CELL_CHUNK = 1 << 18
MIN_X_SAMPLES = 30
MIN_DISTRIBUTION_SAMPLES = 100
HISTOGRAM_BINS = 64
EQUIDIST_EPSILONS = (0.05, 0.1, 0.2)
# 2 pi c1 in the limit |mu_hat(2)| -> 1: parallel lines, 2R of them per unit length.
LINE_FIELD_CONSTANT = 2.0

QuadRegion = Square | FullTorus


# =============================================================================
# Adaptive cell plans
# =============================================================================


@dataclass
class CellLevel:
    """Cells of one subdivision depth: centres, half-width, values and gradients."""

    cx: np.ndarray
    cy: np.ndarray
    half: float
    values: np.ndarray
    g1: np.ndarray
    g2: np.ndarray

    @property
    def area(self) -> float:
        return (2.0 * self.half) ** 2


def _evaluate(field: Field, cx: np.ndarray, cy: np.ndarray, half: float) -> CellLevel:
    g1, g2 = field.gradient(cx, cy)
    return CellLevel(cx, cy, half, field.values(cx, cy), g1, g2)


def _base_level(field: Field, region: QuadRegion, n: int) -> tuple[CellLevel, float]:
    if isinstance(region, FullTorus):
        lo1 = lo2 = 0.0
        side = 1.0
    else:
        side = 2.0 * region.half_side
        lo1 = region.center[0] - region.half_side
        lo2 = region.center[1] - region.half_side
    h = side / n
    axis = (np.arange(n) + 0.5) * h
    cx, cy = np.meshgrid(lo1 + axis, lo2 + axis, indexing="ij")
    return _evaluate(field, cx.ravel(), cy.ravel(), h / 2.0), side * side


def _suspect(field: Field, level: CellLevel) -> np.ndarray:
    """Cells whose centre value does not rule out a zero inside the cell.

    A zero within the half-diagonal r is excluded when |f(c)| > G r for the
    global gradient bound G, or when |f(c)| > |grad f(c)| r + H r^2 / 2 for
    the Hessian bound H.
    """
    r = level.half * math.sqrt(2.0)
    reach = np.full(level.values.shape, -1.0)
    if field.gradient_bound is not None:
        reach = np.full(level.values.shape, field.gradient_bound * r)
    if field.hessian_bound is not None:
        local = np.hypot(level.g1, level.g2) * r + 0.5 * field.hessian_bound * r * r
        reach = np.where(reach < 0, local, np.minimum(reach, local))
    return np.abs(level.values) <= reach


def _children(field: Field, level: CellLevel, mask: np.ndarray) -> CellLevel:
    q = level.half / 2.0
    cx = np.concatenate([level.cx[mask] + dx for dx in (-q, q) for _ in (0, 1)])
    cy = np.concatenate([level.cy[mask] + dy for _ in (0, 1) for dy in (-q, q)])
    return _evaluate(field, cx, cy, q)


def _check_region(region: Square | FullTorus | Disk | None) -> QuadRegion:
    if region is None:
        return FullTorus()
    if isinstance(region, Disk):
        raise InvalidInputError("quadrature regions are squares or the full torus")
    return region


def _log_primitive(s: np.ndarray, p: int) -> np.ndarray:
    """int_0^s |log|t||^p dt for |s| < 1, which is sign(s) Gamma(p+1, -log|s|)."""
    with np.errstate(divide="ignore"):
        z = -np.log(np.abs(s))
    return np.sign(s) * special.gammaincc(p + 1, z) * math.factorial(p)


def _weighted_log_primitive(s: np.ndarray, p: int) -> np.ndarray:
    """int_0^s t |log|t||^p dt for |s| < 1, which is Gamma(p+1, -2 log|s|) / 2^(p+1)."""
    with np.errstate(divide="ignore"):
        z = -2.0 * np.log(np.abs(s))
    return special.gammaincc(p + 1, z) * math.factorial(p) / 2.0 ** (p + 1)


def _linear_means(a: np.ndarray, big: np.ndarray, small: np.ndarray, p: int) -> np.ndarray:
    """Mean of |log|s||^p for s = a + U1 + U2, U_i uniform on [-spread_i, spread_i].

    The density of s is a trapezoid: flat on [a - inner, a + inner] and linear
    down to zero at a +- outer, with inner = big - small and outer = big + small.
    """
    thin = small <= THIN_RATIO * (big + np.abs(a))
    q = np.where(thin, 0.0, small)
    slope = 1.0 / (4.0 * big * np.where(thin, 1.0, small))
    inner = big - q
    outer = big + q

    def _span(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return (
            _log_primitive(hi, p) - _log_primitive(lo, p),
            _weighted_log_primitive(hi, p) - _weighted_log_primitive(lo, p),
        )

    flat0, _ = _span(a - inner, a + inner)
    left0, left1 = _span(a - outer, a - inner)
    right0, right1 = _span(a + inner, a + outer)
    total = flat0 / (2.0 * big)
    total += slope * ((outer - a) * left0 + left1)
    total += slope * ((outer + a) * right0 - right1)
    return np.maximum(total, 0.0)


def _cell_log_means(level: CellLevel, p: int) -> np.ndarray:
    """Mean of |log|f||^p over each cell under the cell's linearisation.

    On a cell of half-width h the model f(c) + grad f(c).u takes values spread
    by h|g1| and h|g2| in the two directions, and both |log|s||^p and
    s|log|s||^p have incomplete-gamma primitives on (-1, 1). Cells whose model
    leaves (-1, 1), or whose gradient is negligible, keep the midpoint value.
    """
    a = level.values
    out = np.abs(np.log(np.maximum(np.abs(a), ABS_FLOOR))) ** p
    spread1 = level.half * np.abs(level.g1)
    spread2 = level.half * np.abs(level.g2)
    big = np.maximum(spread1, spread2)
    small = np.minimum(spread1, spread2)
    ok = (big > 0) & (big > LINEAR_FLOOR * np.abs(a)) & (np.abs(a) + big + small < 1.0)
    idx = np.flatnonzero(ok)
    for s in range(0, len(idx), CELL_CHUNK):
        i = idx[s : s + CELL_CHUNK]
        out[i] = _linear_means(a[i], big[i], small[i], p)
    return out


def log_moment(
    field: Field,
    p: int,
    region: Square | FullTorus | Disk | None = None,
    resolution: int = LOG_RESOLUTION,
    max_depth: int = DEFAULT_DEPTH,
) -> MomentReport:
    """(1/vol) int |log |field||^p over the region by adaptive cell quadrature.

    Each cell contributes the exact integral of its linear model where that is
    available (see :func:`_cell_log_means`). Zero-suspect cells are split into
    four until the estimate moves by at most ``LOG_TOLERANCE`` relative between
    depths, or until ``max_depth``. The last change is the error estimate. The
    report is unconverged when it stopped at ``max_depth`` above tolerance with
    suspect cells still covering more than 1% of the region.
    """
    if p < 1:
        raise InvalidInputError(f"p must be a positive integer, got {p}")
    if not 0 <= max_depth <= MAX_DEPTH:
        raise InvalidInputError(f"max_depth must lie in 0..{MAX_DEPTH}, got {max_depth}")
    if resolution < 1:
        raise InvalidInputError(f"resolution must be positive, got {resolution}")
    quad_region = _check_region(region)

    level, volume = _base_level(field, quad_region, resolution)
    settled = 0.0
    history: list[float] = []
    error = 0.0
    depth = 0
    while True:
        means = _cell_log_means(level, p)
        suspect = _suspect(field, level)
        settled += level.area * float(np.sum(means[~suspect]))
        history.append((settled + level.area * float(np.sum(means[suspect]))) / volume)
        if len(history) > 1:
            error = abs(history[-1] - history[-2])
            if error <= LOG_TOLERANCE * history[-1]:
                break
        if depth == max_depth or not suspect.any():
            break
        level = _children(field, level, suspect)
        depth += 1
        logger.debug("log moment: depth %d, %d refined cells", depth, len(level.values))

    capped = level.area * int(suspect.sum()) / volume
    settled_by_tolerance = len(history) > 1 and error <= LOG_TOLERANCE * history[-1]
    converged = settled_by_tolerance or capped <= CAPPED_AREA_LIMIT
    if not converged:
        logger.warning(
            "log moment: %.2f%% of the area still suspect at depth %d, last change %.3g",
            100 * capped,
            depth,
            error,
        )
    return MomentReport(
        p=p,
        value=history[-1],
        resolution=resolution,
        subdivision_depth=depth,
        error_estimate=error,
        converged=converged,
        capped_fraction=capped,
        history=history,
    )


def _leaf_plan(
    field: Field, region: QuadRegion, resolution: int, depth: int
) -> tuple[np.ndarray, np.ndarray, float]:
    """Leaf values and areas after refining suspect cells to a fixed depth."""
    level, volume = _base_level(field, region, resolution)
    values: list[np.ndarray] = []
    areas: list[np.ndarray] = []
    for d in range(depth + 1):
        if d < depth:
            suspect = _suspect(field, level)
        else:
            suspect = np.zeros(level.values.shape, dtype=bool)
        values.append(level.values[~suspect])
        areas.append(np.full(int((~suspect).sum()), level.area))
        if not suspect.any():
            break
        level = _children(field, level, suspect)
    return np.abs(np.concatenate(values)), np.concatenate(areas), volume


def small_value_profile(
    field: Field,
    deltas: Sequence[float],
    region: Square | FullTorus | Disk | None = None,
    resolution: int = SMALL_VALUE_RESOLUTION,
    depth: int = 4,
) -> list[float]:
    """Area fractions vol{|field| <= delta} for several deltas on one cell plan.

    The plan does not depend on delta, so the fractions are nondecreasing in delta.
    """
    if any(d <= 0 for d in deltas):
        raise InvalidInputError("delta must be positive")
    quad_region = _check_region(region)
    magnitude, areas, _ = _leaf_plan(field, quad_region, resolution, depth)
    total = float(areas.sum())
    return [float(areas[magnitude <= d].sum()) / total for d in deltas]


def small_value_measure(
    field: Field,
    delta: float,
    region: Square | FullTorus | Disk | None = None,
    resolution: int = SMALL_VALUE_RESOLUTION,
    depth: int = 4,
) -> float:
    """vol{|field| <= delta} as a fraction of the region."""
    return small_value_profile(field, [delta], region, resolution, depth)[0]


def fit_small_value_decay(deltas: Sequence[float], volumes: Sequence[float]) -> SmallValueFit:
    """Least-squares fit of log vol = log C - q log(-log delta)."""
    d = np.asarray(deltas, dtype=float)
    v = np.asarray(volumes, dtype=float)
    if len(d) < 2 or np.any(d >= 1) or np.any(d <= 0) or np.any(v <= 0):
        raise InvalidInputError("need at least two deltas in (0, 1) with positive volumes")
    slope, intercept = np.polyfit(np.log(-np.log(d)), np.log(v), 1)
    return SmallValueFit(
        deltas=d.tolist(), volumes=v.tolist(), exponent=-float(slope), log_constant=float(intercept)
    )


# =============================================================================
# Planck-scale nodal lengths
# =============================================================================


@dataclass(frozen=True)
class PlanckSamples:
    centres: np.ndarray
    lengths: np.ndarray
    converged: np.ndarray


def _planck_lengths(
    spec: EigenfunctionSpec,
    scale: float,
    n_x: int,
    seed: int,
    resolution: int,
    ball: Disk | None,
    threads: int,
) -> PlanckSamples:
    """L(F_x) at n_x centres; centre i is drawn from ``derive_seed(seed, i)``."""

    def _centre(i: int) -> tuple[float, float]:
        rng = np.random.default_rng(derive_seed(seed, i))
        u1, u2 = rng.random(2)
        if ball is None:
            return float(u1), float(u2)
        r = ball.radius * math.sqrt(u1)
        t = 2.0 * math.pi * u2
        return ball.center[0] + r * math.cos(t), ball.center[1] + r * math.sin(t)

    centres = [_centre(i) for i in range(n_x)]

    def _one(x: tuple[float, float]) -> tuple[float, bool]:
        est = nodal_length(restrict(spec, PlanckWindow(center=x, scale=scale)), UNIT_BOX, resolution)
        return est.length, est.converged

    results = parallel_map(_one, centres, threads)
    return PlanckSamples(
        np.array(centres),
        np.array([r[0] for r in results]),
        np.array([r[1] for r in results]),
    )


def length_moments(
    spec: EigenfunctionSpec,
    scale: float,
    ps: Sequence[int],
    n_x: int,
    seed: int,
    resolution: int = MIN_RESOLUTION,
    ball: Disk | None = None,
    threads: int = 1,
) -> list[MomentReport]:
    """Monte-Carlo means of L(F_x)^p for several p from one sample plan."""
    if any(p < 1 for p in ps):
        raise InvalidInputError("moment orders must be >= 1")
    if n_x < MIN_X_SAMPLES:
        raise InvalidInputError(f"n_x must be >= {MIN_X_SAMPLES}, got {n_x}")
    if ball is not None and ball.complement:
        raise InvalidInputError("window centres are sampled from a disk, not its complement")
    samples = _planck_lengths(spec, scale, n_x, seed, resolution, ball, threads)
    unconverged = int((~samples.converged).sum())
    if unconverged:
        logger.warning("%d of %d windows did not converge", unconverged, n_x)
    reports = []
    for p in ps:
        powered = samples.lengths**p
        reports.append(
            MomentReport(
                p=p,
                value=float(powered.mean()),
                resolution=resolution,
                error_estimate=float(powered.std(ddof=1) / math.sqrt(n_x)),
                converged=unconverged == 0,
                n_x=n_x,
                scale=scale,
            )
        )
    return reports


def length_moment(
    spec: EigenfunctionSpec,
    scale: float,
    p: int,
    n_x: int,
    seed: int,
    resolution: int = MIN_RESOLUTION,
    ball: Disk | None = None,
    threads: int = 1,
) -> MomentReport:
    """Monte-Carlo mean of L(F_x)^p over uniform x; the error estimate is the SE."""
    return length_moments(spec, scale, [p], n_x, seed, resolution, ball, threads)[0]


def reference_length(spec: EigenfunctionSpec) -> float:
    """2 pi c1(mu_hat_f(2)), the expected L(F_x)/R under the random wave model."""
    matrix = moment_matrix(from_eigenfunction(spec))
    try:
        return physical_length_constant(KacRiceInput(alpha=matrix.alpha, beta=matrix.beta))
    except DegenerateMeasureError:
        return LINE_FIELD_CONSTANT


def planck_distribution(
    spec: EigenfunctionSpec,
    scale: float,
    n_x: int,
    seed: int,
    resolution: int = MIN_RESOLUTION,
    threads: int = 1,
) -> LengthDistribution:
    """Distribution of L(F_x)/R over uniform centres x on the torus."""
    if n_x < MIN_DISTRIBUTION_SAMPLES:
        raise InvalidInputError(f"n_x must be >= {MIN_DISTRIBUTION_SAMPLES}, got {n_x}")
    samples = _planck_lengths(spec, scale, n_x, seed, resolution, None, threads)
    normalised = samples.lengths / scale
    reference = reference_length(spec)
    edges = np.linspace(0.0, 3.0 * reference, HISTOGRAM_BINS + 1)
    counts, _ = np.histogram(np.clip(normalised, edges[0], edges[-1]), bins=edges)
    variance = float(normalised.var(ddof=1))
    dist = LengthDistribution(
        lambda_=spec.lambda_,
        scale=scale,
        n_x=n_x,
        samples=normalised.tolist(),
        mean=float(normalised.mean()),
        variance=variance,
        standard_error=math.sqrt(variance / n_x),
        reference=reference,
        bin_edges=edges.tolist(),
        histogram=counts.tolist(),
        unconverged=int((~samples.converged).sum()),
    )
    dist.equidist = {eps: dist.equidist_fraction(eps) for eps in EQUIDIST_EPSILONS}
    return dist


# =============================================================================
# Exports
# =============================================================================


def export_distribution(
    dist: LengthDistribution,
    path: Path,
    header: str = "",
    extra: Mapping[str, Any] | None = None,
) -> Path:
    """Per-window CSV plus the JSON summary beside it; ``extra`` is merged into the summary."""
    write_csv(
        path,
        ("sample_index", "length_over_R"),
        enumerate(dist.samples),
        header,
    )
    write_json(
        path.with_suffix(".json"),
        {
            "lambda": dist.lambda_,
            "R": dist.scale,
            "p": 1,
            "n_x": dist.n_x,
            "mean": dist.mean,
            "var": dist.variance,
            "se": dist.standard_error,
            "reference": dist.reference,
            "histogram": dist.histogram,
            "bin_edges": dist.bin_edges,
            "equidist": {str(k): v for k, v in dist.equidist.items()},
            "unconverged": dist.unconverged,
            **(extra or {}),
        },
    )
    return path


def export_moments(
    reports: Sequence[MomentReport],
    lam: int,
    path: Path,
    header: str = "",
    extra: Mapping[str, Any] | None = None,
) -> Path:
    """One CSV row per moment order plus the JSON summary beside it."""
    write_csv(
        path,
        ("p", "value", "error_estimate", "n_x", "R", "converged"),
        ((r.p, r.value, r.error_estimate, r.n_x, r.scale, r.converged) for r in reports),
        header,
    )
    write_json(
        path.with_suffix(".json"),
        {
            "lambda": lam,
            "moments": [
                {
                    "p": r.p,
                    "R": r.scale,
                    "n_x": r.n_x,
                    "mean": r.value,
                    "se": r.error_estimate,
                    "converged": r.converged,
                }
                for r in reports
            ],
            **(extra or {}),
        },
    )
    return path
