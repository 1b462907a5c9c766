"""Nodal length by marching squares, with refinement control.

The zero set is approximated by the polyline that linear interpolation places
inside every grid cell with a sign change. Grids are processed in row strips
and the segment lengths are reduced strip by strip in row-major order, so the
result does not depend on how the work is scheduled.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from nodal_lab.eigenfunction import restrict, to_field
from nodal_lab.errors import DegenerateFieldError, InvalidInputError
from nodal_lab.fields import Field
from nodal_lab.models import (
    Disk,
    DoublingSurvey,
    EigenfunctionSpec,
    FullTorus,
    LocalityReport,
    NodalEstimate,
    PlanckWindow,
    Region,
    Square,
)
from nodal_lab.utils import derive_seed, parallel_map

logger = logging.getLogger(__name__)

MIN_RESOLUTION = 64
MAX_RESOLUTION = 8192
DEFAULT_REFINE_TOL = 1e-3
STRIP_ROWS = 256
DOUBLING_RESOLUTION = 512

UNIT_BOX = Square(center=(0.0, 0.0), half_side=0.5)


@dataclass(frozen=True)
class GridPass:
    """One marching-squares pass at a fixed resolution."""

    length: float
    ambiguities: int
    crossing_cells: int


def _check_resolution(n: int) -> None:
    if n < MIN_RESOLUTION or n & (n - 1):
        raise InvalidInputError(
            f"resolution must be a power of two >= {MIN_RESOLUTION}, got {n}"
        )


def region_axes(region: Region, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Node coordinates of the (n+1) x (n+1) sampling grid of a region.

    Torus grids are shifted by half a cell; square and disk grids put nodes on
    the region boundary.
    """
    if isinstance(region, FullTorus):
        axis = (np.arange(n + 1) + 0.5) / n
        return axis, axis.copy()
    half = region.half_side if isinstance(region, Square) else region.radius
    c1, c2 = region.center
    return np.linspace(c1 - half, c1 + half, n + 1), np.linspace(c2 - half, c2 + half, n + 1)


def _clip_to_disk(
    ax: np.ndarray, ay: np.ndarray, bx: np.ndarray, by: np.ndarray, disk: Disk
) -> np.ndarray:
    """Length of each segment [a, b] inside the disk."""
    dx, dy = bx - ax, by - ay
    px, py = ax - disk.center[0], ay - disk.center[1]
    qa = dx * dx + dy * dy
    qb = 2.0 * (px * dx + py * dy)
    qc = px * px + py * py - disk.radius**2
    disc = qb * qb - 4.0 * qa * qc
    ok = (qa > 0) & (disc >= 0)
    root = np.sqrt(np.where(ok, disc, 0.0))
    safe = np.where(ok, qa, 1.0)
    s1 = np.clip((-qb - root) / (2.0 * safe), 0.0, 1.0)
    s2 = np.clip((-qb + root) / (2.0 * safe), 0.0, 1.0)
    return np.where(ok, np.sqrt(qa) * np.maximum(s2 - s1, 0.0), 0.0)


def _strip_pass(
    field: Field,
    g: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
    disk: Disk | None,
) -> GridPass:
    pos = g >= 0.0
    # Edge crossings: 0 bottom (00-10), 1 right (10-11), 2 top (01-11), 3 left (00-01).
    c0 = pos[:-1, :-1] != pos[1:, :-1]
    c1 = pos[1:, :-1] != pos[1:, 1:]
    c2 = pos[:-1, 1:] != pos[1:, 1:]
    c3 = pos[:-1, :-1] != pos[:-1, 1:]
    ii, jj = np.nonzero(c0 | c1 | c2 | c3)
    if len(ii) == 0:
        return GridPass(0.0, 0, 0)

    v00, v10 = g[ii, jj], g[ii + 1, jj]
    v01, v11 = g[ii, jj + 1], g[ii + 1, jj + 1]
    x0, x1 = xs[ii], xs[ii + 1]
    y0, y1 = ys[jj], ys[jj + 1]
    crossing = np.column_stack([c0[ii, jj], c1[ii, jj], c2[ii, jj], c3[ii, jj]])

    def _t(a: np.ndarray, b: np.ndarray, mask: np.ndarray) -> np.ndarray:
        return np.where(mask, a / np.where(mask, a - b, 1.0), 0.0)

    t0 = _t(v00, v10, crossing[:, 0])
    t1 = _t(v10, v11, crossing[:, 1])
    t2 = _t(v01, v11, crossing[:, 2])
    t3 = _t(v00, v01, crossing[:, 3])
    px = np.column_stack([x0 + t0 * (x1 - x0), x1, x0 + t2 * (x1 - x0), x0])
    py = np.column_stack([y0, y0 + t1 * (y1 - y0), y1, y0 + t3 * (y1 - y0)])

    count = crossing.sum(axis=1)
    rows = np.arange(len(ii))
    two = count == 2
    first = np.argmax(crossing, axis=1)
    last = 3 - np.argmax(crossing[:, ::-1], axis=1)
    seg_a = [first[two]]
    seg_b = [last[two]]
    seg_rows = [rows[two]]

    saddle = np.nonzero(count == 4)[0]
    if len(saddle):
        centre = field.values(0.5 * (x0[saddle] + x1[saddle]), 0.5 * (y0[saddle] + y1[saddle]))
        joined = (centre >= 0.0) == pos[ii[saddle], jj[saddle]]
        # Centre shares the 00/11 sign: cut off corners 10 and 01, else 00 and 11.
        seg_a += [np.zeros_like(saddle), np.where(joined, 2, 1)]
        seg_b += [np.where(joined, 1, 3), np.where(joined, 3, 2)]
        seg_rows += [saddle, saddle]

    r = np.concatenate(seg_rows)
    a = np.concatenate(seg_a)
    b = np.concatenate(seg_b)
    ax, ay = px[r, a], py[r, a]
    bx, by = px[r, b], py[r, b]
    lengths = np.hypot(bx - ax, by - ay)
    if disk is not None:
        inside = _clip_to_disk(ax, ay, bx, by, disk)
        lengths = np.maximum(lengths - inside, 0.0) if disk.complement else inside
    return GridPass(float(np.sum(lengths)), len(saddle), len(ii))


def measure_once(field: Field, region: Region, n: int) -> GridPass:
    """A single marching-squares pass on the (n+1) x (n+1) grid of ``region``."""
    xs, ys = region_axes(region, n)
    disk = region if isinstance(region, Disk) else None
    total = 0.0
    ambiguities = 0
    cells = 0
    for s in range(0, n, STRIP_ROWS):
        e = min(s + STRIP_ROWS, n)
        strip_xs = xs[s : e + 1]
        part = _strip_pass(field, field.grid(strip_xs, ys), strip_xs, ys, disk)
        total += part.length
        ambiguities += part.ambiguities
        cells += part.crossing_cells
    return GridPass(total, ambiguities, cells)


def nodal_length(
    field: Field,
    region: Region,
    resolution: int = MIN_RESOLUTION,
    refine_tol: float = DEFAULT_REFINE_TOL,
    max_resolution: int = MAX_RESOLUTION,
    refine: bool = True,
) -> NodalEstimate:
    """Length of {field = 0} inside ``region``.

    Starting at ``resolution`` the grid is doubled until two successive estimates
    differ by less than ``refine_tol * max(1, estimate)`` or ``max_resolution``
    is reached; the last estimate is returned with the full history.

    Args:
        field: Field to measure
        region: Square, disk or the full torus
        resolution: Starting cells per side (power of two >= 64)
        refine_tol: Relative stopping tolerance
        max_resolution: Resolution cap
        refine: If False, measure once at ``resolution``

    Returns:
        NodalEstimate; ``converged`` is False when the cap stopped refinement
    """
    _check_resolution(resolution)
    _check_resolution(max_resolution)
    if resolution > max_resolution:
        raise InvalidInputError(f"resolution {resolution} exceeds the cap {max_resolution}")

    n = resolution
    history: list[tuple[int, float]] = []
    error = 0.0
    converged = not refine
    current = measure_once(field, region, n)
    history.append((n, current.length))
    while refine:
        if n * 2 > max_resolution:
            break
        n *= 2
        current = measure_once(field, region, n)
        error = abs(current.length - history[-1][1])
        history.append((n, current.length))
        if error < refine_tol * max(1.0, current.length):
            converged = True
            break

    note = None
    if current.crossing_cells == 0:
        note = "no crossing detected"
    elif not converged:
        note = f"refinement did not converge by resolution {n}"
        logger.warning("nodal length unconverged at n=%d (last change %.3g)", n, error)
    logger.debug("nodal length %.6g at n=%d after %d passes", current.length, n, len(history))
    return NodalEstimate(
        length=current.length,
        resolution=n,
        refinement_error=error,
        cell_ambiguities=current.ambiguities,
        history=history,
        converged=converged,
        note=note,
    )


def nodal_length_planck(
    spec: EigenfunctionSpec,
    x: tuple[float, float],
    scale: float,
    resolution: int = MIN_RESOLUTION,
    refine_tol: float = DEFAULT_REFINE_TOL,
    max_resolution: int = MAX_RESOLUTION,
) -> NodalEstimate:
    """L(F_x) on [-1/2, 1/2]^2 for the window of size R = ``scale`` at ``x``."""
    window = PlanckWindow(center=x, scale=scale)
    return nodal_length(
        restrict(spec, window), UNIT_BOX, resolution, refine_tol, max_resolution
    )


# =============================================================================
# Doubling index
# =============================================================================


def doubling_ratio(field: Field, box: Square, resolution: int = DOUBLING_RESOLUTION) -> float:
    """log(sup_{2B} |field| / sup_B |field|), sups taken on grids."""
    inner = np.abs(field.grid(*region_axes(box, resolution))).max()
    if inner < 1e-300:
        raise DegenerateFieldError(f"field vanishes on the box around {box.center}")
    double = Square(center=box.center, half_side=2.0 * box.half_side)
    outer = np.abs(field.grid(*region_axes(double, resolution))).max()
    return float(math.log(outer / inner))


def doubling_survey(
    spec: EigenfunctionSpec,
    scale: float,
    n_boxes: int,
    seed: int,
    resolution: int = MIN_RESOLUTION,
    threads: int = 1,
) -> DoublingSurvey:
    """Doubling ratios of random Planck windows against their nodal lengths.

    Each window F_x contributes the ratio over B = [-1/4, 1/4]^2 and
    L(F_x) on [-1/2, 1/2]^2; the survey reports Spearman's rank correlation.
    """
    if n_boxes < 3:
        raise InvalidInputError(f"a rank correlation needs at least 3 boxes, got {n_boxes}")
    box = Square(center=(0.0, 0.0), half_side=0.25)

    def _one(i: int) -> tuple[float, float]:
        rng = np.random.default_rng(derive_seed(seed, i))
        x1, x2 = rng.random(2)
        field = restrict(spec, PlanckWindow(center=(float(x1), float(x2)), scale=scale))
        estimate = nodal_length(field, UNIT_BOX, resolution)
        return doubling_ratio(field, box), estimate.length

    pairs = parallel_map(_one, list(range(n_boxes)), threads)
    ratios = [p[0] for p in pairs]
    lengths = [p[1] for p in pairs]
    rho, p_value = stats.spearmanr(ratios, lengths)
    return DoublingSurvey(
        ratios=ratios, lengths=lengths, spearman=float(rho), p_value=float(p_value)
    )


# =============================================================================
# Locality
# =============================================================================


def relative_discrepancy(lhs: float, rhs: float) -> float:
    """|lhs - rhs| / lhs; inf when only lhs vanishes, 0 when both do."""
    if lhs > 0:
        return abs(lhs - rhs) / lhs
    return math.inf if rhs > 0 else 0.0


def locality_check(
    spec: EigenfunctionSpec,
    ball: Disk,
    scale: float,
    n_mc: int,
    seed: int,
    resolution: int = MIN_RESOLUTION,
    lhs_resolution: int = 1024,
    threads: int = 1,
) -> LocalityReport:
    """Compare L(f, B) with (sqrt(lambda)/R) * int_B L(F_x) dx.

    Besides the Monte-Carlo estimate over B the report brackets L(f, B) by the
    same integral over B(r - r') and B(r + r'), r' the half-diagonal of a
    window: windows centred in the inner ball lie inside B, and every window
    meeting B is centred in the outer one.
    """
    if n_mc < 1:
        raise InvalidInputError(f"n_mc must be >= 1, got {n_mc}")
    if ball.complement:
        raise InvalidInputError("locality is checked on a disk, not its complement")
    side = scale / math.sqrt(spec.lambda_)
    if ball.radius < 10.0 * side:
        raise InvalidInputError(
            f"ball radius {ball.radius} is below 10 R / sqrt(lambda) = {10.0 * side:.4g}"
        )

    lhs = nodal_length(to_field(spec), ball, lhs_resolution).length
    reach = side / math.sqrt(2.0)
    r = ball.radius
    n_ring = max(1, n_mc // 4)
    rng = np.random.default_rng(seed)
    radii = np.concatenate(
        [
            r * np.sqrt(rng.random(n_mc)),
            np.sqrt(r**2 + rng.random(n_ring) * ((r + reach) ** 2 - r**2)),
        ]
    )
    angles = 2.0 * math.pi * rng.random(n_mc + n_ring)
    cx = ball.center[0] + radii * np.cos(angles)
    cy = ball.center[1] + radii * np.sin(angles)

    def _one(i: int) -> float:
        window = PlanckWindow(center=(float(cx[i]), float(cy[i])), scale=scale)
        return nodal_length(restrict(spec, window), UNIT_BOX, resolution).length

    lengths = np.array(parallel_map(_one, list(range(n_mc + n_ring)), threads))
    inside, ring = lengths[:n_mc], lengths[n_mc:]
    factor = math.sqrt(spec.lambda_) / scale
    rhs = factor * ball.area * float(inside.mean())
    spread = float(inside.std(ddof=1)) if n_mc > 1 else 0.0
    se = factor * ball.area * spread / math.sqrt(n_mc)
    core = np.where(radii[:n_mc] <= r - reach, inside, 0.0)
    lower = factor * ball.area * float(core.mean())
    ring_area = math.pi * ((r + reach) ** 2 - r**2)
    upper = rhs + factor * ring_area * float(ring.mean())
    discrepancy = relative_discrepancy(lhs, rhs)
    logger.info(
        "locality: L(f,B)=%.5g, MC=%.5g +- %.2g, bracket [%.5g, %.5g]",
        lhs, rhs, se, lower, upper,
    )
    return LocalityReport(
        lhs=lhs,
        rhs=rhs,
        discrepancy=discrepancy,
        standard_error=se,
        lower=lower,
        upper=upper,
        n_mc=n_mc,
    )
