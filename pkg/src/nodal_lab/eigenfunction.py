"""Toral Laplace eigenfunctions f(x) = sum_xi a_xi e(<xi, x>) and their Planck windows."""

import logging
import math
from collections.abc import Sequence
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike
from pydantic import ValidationError

from nodal_lab.errors import ConsistencyError, InvalidInputError
from nodal_lab.fields import TWO_PI, PlaneWaveField
from nodal_lab.lattice import multiplicity, require_eigenvalue
from nodal_lab.models import Coefficient, EigenfunctionSpec, LatticePoint, PlanckWindow

logger = logging.getLogger(__name__)

IMAG_TOL = 1e-10
FLATNESS_CONSTANT = 100.0
DEFAULT_ARCS = (1, 5)


def _spec(lam: int, coefficients: dict[LatticePoint, complex]) -> EigenfunctionSpec:
    try:
        return EigenfunctionSpec(
            lambda_=lam,
            coefficients=[
                Coefficient(xi=xi, re=a.real, im=a.imag) for xi, a in coefficients.items()
            ],
        )
    except ValidationError as e:
        raise InvalidInputError(str(e)) from e


def is_upper(xi: LatticePoint) -> bool:
    """True for the representative of {xi, -xi} with angle in [0, pi)."""
    return xi.x2 > 0 or (xi.x2 == 0 and xi.x1 > 0)


def octant(xi: LatticePoint) -> int:
    """Arc index k in 1..8 with angle(xi) in [(k-1) pi/4, k pi/4), in exact arithmetic."""
    a, b = xi
    if not is_upper(xi):
        return octant(LatticePoint(-a, -b)) + 4
    if a > 0:
        return 1 if b < a else 2
    return 3 if b > -a else 4


# =============================================================================
# Constructors
# =============================================================================


def build_bourgain(lam: int) -> EigenfunctionSpec:
    """All N coefficients equal to 1/sqrt(N)."""
    circle = require_eigenvalue(lam)
    a = 1.0 / math.sqrt(circle.multiplicity)
    return _spec(lam, {xi: complex(a) for xi in circle.points})


def build_arc_bourgain(
    lam: int, arcs: Sequence[int] = DEFAULT_ARCS
) -> EigenfunctionSpec:
    """Equal coefficients on the lattice points inside the chosen eighths of the circle.

    Arcs are numbered 1..8 anticlockwise from (1, 0). The selection must be closed
    under k -> k + 4 (mod 8) so the coefficients stay Hermitian; the equal value is
    1/sqrt(M) for the M selected points, which keeps the spec normalised whatever
    the arc counts are.
    """
    chosen = set(arcs)
    if not chosen or not chosen <= set(range(1, 9)):
        raise InvalidInputError(f"arc indices must lie in 1..8, got {sorted(arcs)}")
    for k in chosen:
        if (k + 3) % 8 + 1 not in chosen:
            raise InvalidInputError(
                f"arc selection {sorted(chosen)} is not antipodal: {k} lacks {(k + 3) % 8 + 1}"
            )
    circle = require_eigenvalue(lam)
    selected = [xi for xi in circle.points if octant(xi) in chosen]
    if not selected:
        raise InvalidInputError(f"no lattice point of lambda={lam} lies in arcs {sorted(chosen)}")
    a = 1.0 / math.sqrt(len(selected))
    logger.debug("arc-Bourgain lambda=%d: %d of %d points", lam, len(selected), circle.multiplicity)
    return _spec(lam, {xi: complex(a) for xi in selected})


def build_random_flat(lam: int, epsilon: float, seed: int) -> EigenfunctionSpec:
    """Random phases and moduli on every antipodal pair, normalised; deterministic in seed."""
    if epsilon < 0:
        raise InvalidInputError(f"epsilon must be >= 0, got {epsilon}")
    circle = require_eigenvalue(lam)
    rng = np.random.default_rng(seed)
    upper = [xi for xi in circle.points if is_upper(xi)]
    moduli = rng.uniform(0.5, 1.5, size=len(upper))
    phases = rng.uniform(0.0, TWO_PI, size=len(upper))
    scale = 1.0 / math.sqrt(2.0 * float(np.sum(moduli**2)))
    coefficients: dict[LatticePoint, complex] = {}
    for xi, r, phi in zip(upper, moduli, phases, strict=True):
        a = complex(r * scale * math.cos(phi), r * scale * math.sin(phi))
        coefficients[xi] = a
        coefficients[-xi] = a.conjugate()
    spec = _spec(lam, coefficients)
    margin = flatness_margin(spec, epsilon)
    if margin > FLATNESS_CONSTANT:
        raise ConsistencyError(f"random flat spec has margin {margin:.3g}")
    return spec


def build_single_pair(xi: LatticePoint) -> EigenfunctionSpec:
    """a_xi = a_{-xi} = 1/sqrt(2), i.e. f(x) = sqrt(2) cos(2 pi <xi, x>)."""
    if xi.norm2 == 0:
        raise InvalidInputError("the zero frequency is not an eigenfunction of interest")
    a = complex(1.0 / math.sqrt(2.0))
    return _spec(xi.norm2, {xi: a, -xi: a})


def shift(spec: EigenfunctionSpec, tau: Sequence[float]) -> EigenfunctionSpec:
    """Phase-shifted spec a_xi e(<xi, tau>), whose value at x is f(x + tau)."""
    t1, t2 = float(tau[0]), float(tau[1])
    out: dict[LatticePoint, complex] = {}
    for c in spec.coefficients:
        phase = TWO_PI * (c.xi.x1 * t1 + c.xi.x2 * t2)
        out[c.xi] = c.value * complex(math.cos(phase), math.sin(phase))
    return _spec(spec.lambda_, out)


# =============================================================================
# Evaluation
# =============================================================================


def _sum(spec: EigenfunctionSpec, x: ArrayLike, weights: np.ndarray) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1] != 2:
        raise InvalidInputError(f"points must have a trailing dimension of 2, got {pts.shape}")
    phases = np.exp(1j * TWO_PI * (pts @ spec.frequencies().T))
    z = phases @ weights
    residue = float(np.max(np.abs(z.imag))) if z.size else 0.0
    if residue > IMAG_TOL:
        raise ConsistencyError(f"imaginary residue {residue:.3e} exceeds {IMAG_TOL}")
    return np.asarray(z.real)


def evaluate(spec: EigenfunctionSpec, x: ArrayLike) -> np.ndarray:
    """f at one point (shape (2,)) or at a stack of points (shape (..., 2))."""
    return _sum(spec, x, spec.amplitudes())


def evaluate_gradient(spec: EigenfunctionSpec, x: ArrayLike) -> np.ndarray:
    """grad f, shape (..., 2)."""
    a = spec.amplitudes()
    xi = spec.frequencies()
    return np.stack(
        [_sum(spec, x, 1j * TWO_PI * xi[:, j] * a) for j in range(2)], axis=-1
    )


def flatness_margin(spec: EigenfunctionSpec, epsilon: float) -> float:
    """max_xi |a_xi|^2 N^{1 - epsilon}; the spec is flat at level epsilon iff <= 100."""
    n = multiplicity(spec.lambda_)
    peak = max((abs(c.value) ** 2 for c in spec.coefficients), default=0.0)
    return peak * n ** (1.0 - epsilon)


def to_field(spec: EigenfunctionSpec) -> PlaneWaveField:
    """The spec as a plane-wave field over one representative per antipodal pair."""
    upper = [c for c in spec.coefficients if is_upper(c.xi)]
    return PlaneWaveField(
        np.array([c.xi for c in upper], dtype=float).reshape(-1, 2),
        np.array([2.0 * c.value for c in upper], dtype=complex),
    )


def restrict(spec: EigenfunctionSpec, window: PlanckWindow) -> PlaneWaveField:
    """F_x(y) = f(x + R y / sqrt(lambda)) for y in [-1/2, 1/2]^2."""
    return to_field(spec).affine(window.center, window.scale / math.sqrt(spec.lambda_))


# =============================================================================
# JSON documents
# =============================================================================


def save_spec(spec: EigenfunctionSpec, path: Path) -> None:
    path.write_text(spec.model_dump_json(by_alias=True, indent=2) + "\n", encoding="utf-8")


def load_spec(path: Path) -> EigenfunctionSpec:
    if not path.is_file():
        raise InvalidInputError(f"spec file not found: {path}")
    try:
        return EigenfunctionSpec.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise InvalidInputError(f"invalid spec {path}: {e}") from e
