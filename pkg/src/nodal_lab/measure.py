"""Symmetric probability measures on the unit circle.

Fourier moments, the covariance r(w) = int e(<w, u>) dmu(u) of the associated
stationary field, its first two derivatives, and the gradient moment matrix L.
"""

import logging
import math
from collections.abc import Callable, Sequence
from pathlib import Path

import numpy as np
from pydantic import TypeAdapter, ValidationError
from scipy import integrate, special

from nodal_lab.errors import DegenerateMeasureError, InvalidInputError
from nodal_lab.models import (
    TWO_PI,
    Arc,
    ArcUniformMeasure,
    Atom,
    AtomicMeasure,
    ComplexMoment,
    DirectionMeasure,
    EigenfunctionSpec,
    LebesgueMeasure,
    MomentMatrix,
)

logger = logging.getLogger(__name__)

QUAD_EPSABS = 1e-10
QUAD_LIMIT = 200
NORM_TOL = 1e-12

_adapter: TypeAdapter[DirectionMeasure] = TypeAdapter(DirectionMeasure)


def wrap_angle(theta: float) -> float:
    """Reduce to [0, 2pi); never returns 2pi itself."""
    t = theta % TWO_PI
    return 0.0 if t >= TWO_PI else t


# =============================================================================
# Constructors
# =============================================================================


def lebesgue() -> LebesgueMeasure:
    return LebesgueMeasure()


def eight_arc_measure() -> ArcUniformMeasure:
    """Mass 1/2 uniformly on each of [0, pi/4) and [pi, 5pi/4)."""
    quarter = math.pi / 4
    return ArcUniformMeasure(
        arcs=[
            Arc(start=0.0, end=quarter, mass=0.5),
            Arc(start=math.pi, end=math.pi + quarter, mass=0.5),
        ]
    )


def atomic_from_angles(
    angles: Sequence[float], weights: Sequence[float] | None = None
) -> AtomicMeasure:
    """Atomic measure from angles; weights default to uniform and are renormalised."""
    if not angles:
        raise InvalidInputError("an atomic measure needs at least one atom")
    w = np.ones(len(angles)) if weights is None else np.asarray(weights, dtype=float)
    if len(w) != len(angles) or np.any(w <= 0):
        raise InvalidInputError("weights must be positive, one per angle")
    w = w / w.sum()
    try:
        return AtomicMeasure(
            atoms=[
                Atom(angle=wrap_angle(a), weight=float(x))
                for a, x in zip(angles, w, strict=True)
            ]
        )
    except ValidationError as e:
        raise InvalidInputError(str(e)) from e


def four_atom_measure() -> AtomicMeasure:
    """Equal atoms at +-(1, 0) and +-(0, 1)."""
    return atomic_from_angles([0.0, math.pi / 2, math.pi, 3 * math.pi / 2])


def from_eigenfunction(spec: EigenfunctionSpec) -> AtomicMeasure:
    """Atoms at the angles of xi / sqrt(lambda) with weights |a_xi|^2."""
    norm = spec.l2_norm_squared
    if abs(norm - 1.0) > NORM_TOL:
        raise InvalidInputError(f"spec is not normalised: sum |a_xi|^2 = {norm!r}")
    atoms = [
        Atom(angle=c.xi.angle, weight=abs(c.value) ** 2)
        for c in spec.coefficients
        if c.value != 0
    ]
    # Rescale away the rounding left in the squared moduli.
    total = math.fsum(a.weight for a in atoms)
    return AtomicMeasure(
        atoms=[Atom(angle=a.angle, weight=a.weight / total) for a in atoms]
    )


NAMED_MEASURES = {
    "lebesgue": lebesgue,
    "eight-arc": eight_arc_measure,
    "four-atom": four_atom_measure,
}


def resolve_measure(name_or_path: str) -> DirectionMeasure:
    """A named measure (see ``NAMED_MEASURES``) or one loaded from a JSON file."""
    factory = NAMED_MEASURES.get(name_or_path)
    if factory is not None:
        return factory()
    return load_measure(Path(name_or_path))


# =============================================================================
# Moments and covariance
# =============================================================================


def _atom_arrays(mu: AtomicMeasure) -> tuple[np.ndarray, np.ndarray]:
    theta = np.array([a.angle for a in mu.atoms])
    weight = np.array([a.weight for a in mu.atoms])
    return theta, weight


def _arc_moment(arc: Arc, k: int) -> complex:
    if k == 0:
        return complex(arc.mass)
    ka, kb = k * arc.start, k * arc.end
    rise = complex(math.cos(kb), math.sin(kb)) - complex(math.cos(ka), math.sin(ka))
    return arc.mass * rise / (1j * k * arc.width)


def fourier_moment(mu: DirectionMeasure, k: int) -> ComplexMoment:
    """mu_hat(k) = int e^{i k theta} dmu(theta), exact for every variant."""
    if isinstance(mu, LebesgueMeasure):
        value = complex(1.0 if k == 0 else 0.0)
    elif isinstance(mu, AtomicMeasure):
        theta, weight = _atom_arrays(mu)
        value = complex(np.sum(weight * np.exp(1j * k * theta)))
    else:
        value = sum((_arc_moment(arc, k) for arc in mu.arcs), complex(0.0))
    return ComplexMoment(re=value.real, im=value.imag)


def _arc_quad(arc: Arc, integrand: Callable[[float], float]) -> float:
    value, _ = integrate.quad(
        integrand, arc.start, arc.end, epsabs=QUAD_EPSABS, epsrel=0.0, limit=QUAD_LIMIT
    )
    return float(arc.mass * value / arc.width)


def covariance(mu: DirectionMeasure, w: Sequence[float]) -> float:
    """r(w) = E[F(x + w) F(x)] for the field with spectral measure mu."""
    w1, w2 = float(w[0]), float(w[1])
    if isinstance(mu, LebesgueMeasure):
        return float(special.j0(TWO_PI * math.hypot(w1, w2)))
    if isinstance(mu, AtomicMeasure):
        theta, weight = _atom_arrays(mu)
        return float(np.sum(weight * np.cos(TWO_PI * (w1 * np.cos(theta) + w2 * np.sin(theta)))))
    return math.fsum(
        _arc_quad(arc, lambda t: math.cos(TWO_PI * (w1 * math.cos(t) + w2 * math.sin(t))))
        for arc in mu.arcs
    )


def _bessel_derivatives(w1: float, w2: float) -> tuple[np.ndarray, np.ndarray]:
    k = TWO_PI
    rho = math.hypot(w1, w2)
    if rho < 1e-12:
        return np.zeros(2), -(k * k / 2.0) * np.eye(2)
    kr = k * rho
    j0, j1 = special.j0(kr), special.j1(kr)
    g1 = -k * j1
    g2 = -k * k * (j0 - j1 / kr)
    u = np.array([w1, w2]) / rho
    proj = np.outer(u, u)
    return g1 * u, g2 * proj + (g1 / rho) * (np.eye(2) - proj)


def covariance_derivatives(
    mu: DirectionMeasure, w: Sequence[float]
) -> tuple[np.ndarray, np.ndarray]:
    """Gradient and Hessian of r at w, with the 2pi factors of e(.) kept explicit.

    Returns:
        ``(grad, hessian)`` with shapes (2,) and (2, 2)
    """
    w1, w2 = float(w[0]), float(w[1])
    if isinstance(mu, LebesgueMeasure):
        return _bessel_derivatives(w1, w2)

    if isinstance(mu, AtomicMeasure):
        theta, weight = _atom_arrays(mu)
        u = np.column_stack([np.cos(theta), np.sin(theta)])
        phase = TWO_PI * (u @ np.array([w1, w2]))
        grad = -TWO_PI * (weight * np.sin(phase)) @ u
        hess = -(TWO_PI**2) * (u.T * (weight * np.cos(phase))) @ u
        return grad, hess

    grad = np.zeros(2)
    hess = np.zeros((2, 2))

    def _phase(t: float) -> float:
        return TWO_PI * (w1 * math.cos(t) + w2 * math.sin(t))

    components = {
        (0,): lambda t: math.cos(t) * math.sin(_phase(t)),
        (1,): lambda t: math.sin(t) * math.sin(_phase(t)),
        (0, 0): lambda t: math.cos(t) ** 2 * math.cos(_phase(t)),
        (0, 1): lambda t: math.cos(t) * math.sin(t) * math.cos(_phase(t)),
        (1, 1): lambda t: math.sin(t) ** 2 * math.cos(_phase(t)),
    }
    for arc in mu.arcs:
        for index, fn in components.items():
            value = _arc_quad(arc, fn)
            if len(index) == 1:
                grad[index[0]] -= TWO_PI * value
            else:
                hess[index] -= TWO_PI**2 * value
    hess[1, 0] = hess[0, 1]
    return grad, hess


def moment_matrix(mu: DirectionMeasure) -> MomentMatrix:
    """L = [[1/2 + alpha/2, beta/2], [beta/2, 1/2 - alpha/2]] from mu_hat(2)."""
    m2 = fourier_moment(mu, 2)
    return MomentMatrix(alpha=m2.re, beta=m2.im)


def is_degenerate(mu: DirectionMeasure) -> bool:
    return moment_matrix(mu).degenerate


def require_nondegenerate(mu: DirectionMeasure) -> MomentMatrix:
    """Moment matrix of mu, raising when mu is supported on a line."""
    matrix = moment_matrix(mu)
    if matrix.degenerate:
        raise DegenerateMeasureError(
            f"measure is supported on a line: det L = {matrix.det:.3e}"
        )
    return matrix


# =============================================================================
# JSON documents
# =============================================================================


def dump_measure(mu: DirectionMeasure) -> str:
    return _adapter.dump_json(mu, indent=2).decode()


def parse_measure(text: str) -> DirectionMeasure:
    try:
        return _adapter.validate_json(text)
    except ValidationError as e:
        raise InvalidInputError(f"invalid measure document: {e}") from e


def save_measure(mu: DirectionMeasure, path: Path) -> None:
    path.write_text(dump_measure(mu) + "\n", encoding="utf-8")


def load_measure(path: Path) -> DirectionMeasure:
    if not path.is_file():
        raise InvalidInputError(f"measure file not found: {path}")
    return parse_measure(path.read_text(encoding="utf-8"))
