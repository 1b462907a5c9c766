"""Stationary Gaussian fields with spectral measure on the unit circle.

A field with atomic spectral measure sum_k w_k delta_{u_k} is sampled exactly as
the random trigonometric sum

    F(y) = sum_pairs sqrt(w_pair) (a cos(2 pi R <u, y>) + b sin(2 pi R <u, y>)),

one standard Gaussian pair (a, b) per antipodal pair {u, -u} with
w_pair = w(u) + w(-u). Continuous measures are discretised first.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from nodal_lab.errors import InvalidInputError
from nodal_lab.fields import PlaneWaveField
from nodal_lab.measure import require_nondegenerate, wrap_angle
from nodal_lab.models import (
    ArcUniformMeasure,
    Atom,
    AtomicMeasure,
    DirectionMeasure,
    LebesgueMeasure,
    McStatistics,
    Square,
)
from nodal_lab.nodal import DEFAULT_REFINE_TOL, MIN_RESOLUTION, nodal_length
from nodal_lab.utils import derive_seed, parallel_map, write_csv

logger = logging.getLogger(__name__)

DEFAULT_ATOMS = 256
MIN_SAMPLES = 30
SAMPLE_COLUMNS = ("sample_index", "seed", "length", "converged")


def _folded_quantiles(mu: ArcUniformMeasure, count: int) -> np.ndarray:
    """Midpoint quantiles of mu pushed forward to [0, pi) by theta -> theta mod pi."""
    pieces: list[tuple[float, float, float]] = []
    for arc in mu.arcs:
        start = arc.start % math.pi
        end = start + arc.width
        density = arc.mass / arc.width
        while end > math.pi:
            pieces.append((start, math.pi, density))
            start, end = 0.0, end - math.pi
        pieces.append((start, end, density))
    breaks = np.unique(np.array([p[0] for p in pieces] + [p[1] for p in pieces]))
    dens = np.zeros(len(breaks) - 1)
    for a, b, d in pieces:
        dens[(breaks[:-1] >= a) & (breaks[1:] <= b)] += d
    cdf = np.concatenate([[0.0], np.cumsum(dens * np.diff(breaks))])
    cdf /= cdf[-1]
    q = (np.arange(count) + 0.5) / count
    return np.interp(q, cdf, breaks)


def discretize_measure(mu: DirectionMeasure, n_atoms: int = DEFAULT_ATOMS) -> AtomicMeasure:
    """Antipodally paired atoms of equal mass 1/n_atoms.

    Lebesgue measure becomes the n-th roots of unity. Arc mixtures are folded
    modulo pi, the n/2 midpoint quantiles of the folded distribution are kept
    and each is paired with its antipode. Atomic measures pass through.
    """
    if isinstance(mu, AtomicMeasure):
        return mu
    if n_atoms < 4 or n_atoms % 2:
        raise InvalidInputError(f"n_atoms must be even and >= 4, got {n_atoms}")
    require_nondegenerate(mu)
    if isinstance(mu, LebesgueMeasure):
        angles = 2.0 * math.pi * np.arange(n_atoms) / n_atoms
    else:
        half = _folded_quantiles(mu, n_atoms // 2)
        angles = np.concatenate([half, half + math.pi])
    weight = 1.0 / n_atoms
    return AtomicMeasure(atoms=[Atom(angle=wrap_angle(float(t)), weight=weight) for t in angles])


@dataclass(frozen=True)
class FieldSample:
    """One realisation of F_mu(R .)."""

    directions: np.ndarray
    pair_weights: np.ndarray
    a: np.ndarray
    b: np.ndarray
    scale: float
    seed: int

    @property
    def field(self) -> PlaneWaveField:
        # a cos(phi) + b sin(phi) = Re((a - i b) e^{i phi})
        return PlaneWaveField(
            self.scale * self.directions,
            np.sqrt(self.pair_weights) * (self.a - 1j * self.b),
        )

    def values(self, y1: np.ndarray, y2: np.ndarray) -> np.ndarray:
        return self.field.values(y1, y2)

    def gradient(self, y1: np.ndarray, y2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.field.gradient(y1, y2)


def antipodal_pairs(mu: AtomicMeasure) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions with angle in [0, pi) and the mass of each pair {u, -u}."""
    reps = [a for a in mu.atoms if a.angle < math.pi]
    theta = np.array([a.angle for a in reps])
    directions = np.column_stack([np.cos(theta), np.sin(theta)])
    return directions, 2.0 * np.array([a.weight for a in reps])


def sample_field(mu: DirectionMeasure, scale: float, seed: int) -> FieldSample:
    """Draw one realisation; identical seeds give identical fields."""
    if not isinstance(mu, AtomicMeasure):
        raise InvalidInputError("sample_field needs an atomic measure; discretize it first")
    if scale <= 0:
        raise InvalidInputError(f"scale must be positive, got {scale}")
    require_nondegenerate(mu)
    directions, weights = antipodal_pairs(mu)
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, len(weights)))
    return FieldSample(directions, weights, a, b, float(scale), seed)


def mc_nodal_statistics(
    mu: DirectionMeasure,
    scale: float,
    n_samples: int,
    seed: int,
    resolution: int = MIN_RESOLUTION,
    refine_tol: float = DEFAULT_REFINE_TOL,
    n_atoms: int = DEFAULT_ATOMS,
    center: tuple[float, float] = (0.0, 0.0),
    threads: int = 1,
) -> McStatistics:
    """Monte-Carlo statistics of the nodal length of F_mu(R .) on a unit square.

    Sample i uses ``derive_seed(seed, i)``; results are gathered in sample order,
    so they do not depend on ``threads``.

    Args:
        mu: Spectral measure
        scale: R
        n_samples: Number of realisations (>= 30)
        seed: Master seed
        resolution: Starting grid resolution
        refine_tol: Relative refinement tolerance
        n_atoms: Atoms used to discretise continuous measures
        center: Centre of the unit square the length is measured on
        threads: Worker threads

    Returns:
        McStatistics with per-sample lengths, seeds and convergence flags
    """
    if n_samples < MIN_SAMPLES:
        raise InvalidInputError(f"n_samples must be >= {MIN_SAMPLES}, got {n_samples}")
    atomic = discretize_measure(mu, n_atoms)
    require_nondegenerate(atomic)
    box = Square(center=center, half_side=0.5)
    seeds = [derive_seed(seed, i) for i in range(n_samples)]

    def _one(sample_seed: int) -> tuple[float, bool]:
        field = sample_field(atomic, scale, sample_seed).field
        est = nodal_length(field, box, resolution, refine_tol)
        return est.length, est.converged

    results = parallel_map(_one, seeds, threads)
    lengths = np.array([r[0] for r in results])
    converged = [r[1] for r in results]
    variance = float(lengths.var(ddof=1))
    stats = McStatistics(
        n_samples=n_samples,
        scale=scale,
        mean=float(lengths.mean()),
        variance=variance,
        standard_error=math.sqrt(variance / n_samples),
        lengths=lengths.tolist(),
        seeds=seeds,
        converged=converged,
    )
    if stats.unconverged:
        logger.warning("%d of %d samples did not converge", stats.unconverged, n_samples)
    return stats


def export_samples(stats: McStatistics, path: Path, header: str = "") -> Path:
    """Per-sample CSV with columns sample_index, seed, length, converged."""
    rows = (
        (i, s, length, ok)
        for i, (s, length, ok) in enumerate(
            zip(stats.seeds, stats.lengths, stats.converged, strict=True)
        )
    )
    return write_csv(path, SAMPLE_COLUMNS, rows, header)
