"""Kac-Rice constants of a stationary field with mu_hat(2) = alpha + i beta.

c1 is the expected nodal length per unit area and unit R, in the unit-wavenumber
normalisation; fields written with e(t) = exp(2 pi i t) have expected length
2 pi c1 R per unit area (see :func:`physical_length_constant`).
"""

import logging
import math
from collections.abc import Iterable
from typing import Literal

import numpy as np
from scipy import integrate

from nodal_lab.errors import DegenerateMeasureError, InvalidInputError
from nodal_lab.models import KacRiceInput, MomentMatrix

logger = logging.getLogger(__name__)

DEGENERATE_MARGIN = 1e-12
# The variance integral is split at t = TAIL_START and the rest added analytically.
TAIL_START = 1e6

C1Path = Literal["auto", "closed-form", "general"]


def _require_nondegenerate(inp: KacRiceInput) -> float:
    d = 1.0 - inp.modulus_squared
    if d <= DEGENERATE_MARGIN:
        raise DegenerateMeasureError(
            f"|mu_hat(2)|^2 = {inp.modulus_squared!r} leaves no room for a nondegenerate field"
        )
    return d


def gaussian_norm_expectation(cov: np.ndarray) -> float:
    """E|Z| for Z ~ N(0, cov) in R^2.

    With eigenvalues s1, s2 of cov, |Z| factors into a Rayleigh radius and a
    uniform angle: E|Z| = sqrt(pi/2) (1/2pi) int sqrt(s1 cos^2 + s2 sin^2) dtheta.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (2, 2) or not np.allclose(cov, cov.T, atol=1e-14):
        raise InvalidInputError("covariance must be a symmetric 2x2 matrix")
    s1, s2 = np.linalg.eigvalsh(cov)
    if s1 <= 0 or np.linalg.det(cov) <= 0:
        raise DegenerateMeasureError(f"singular covariance (eigenvalues {s1:.3g}, {s2:.3g})")
    value, _ = integrate.quad(
        lambda t: math.sqrt(s1 * math.cos(t) ** 2 + s2 * math.sin(t) ** 2),
        0.0,
        2.0 * math.pi,
        epsabs=1e-12,
        epsrel=1e-12,
        limit=200,
    )
    return math.sqrt(math.pi / 2.0) * value / (2.0 * math.pi)


def expected_length_constant(inp: KacRiceInput, path: C1Path = "auto") -> float:
    """c1 = E|grad F(0)| / sqrt(2 pi) for the normalised gradient covariance L.

    Args:
        inp: alpha, beta
        path: 'closed-form' (beta = 0 only), 'general', or 'auto' which uses the
            closed form whenever beta == 0

    Returns:
        c1; equals 1/(2 sqrt 2) at alpha = beta = 0
    """
    _require_nondegenerate(inp)
    if path == "auto":
        path = "closed-form" if inp.beta == 0.0 else "general"
    if path == "closed-form":
        if inp.beta != 0.0:
            raise InvalidInputError("the closed form needs beta = 0")
        alpha = inp.alpha
        value, _ = integrate.quad(
            lambda t: (1.0 - alpha * math.cos(2.0 * t)) ** -1.5,
            0.0,
            2.0 * math.pi,
            epsabs=1e-12,
            epsrel=1e-12,
            limit=200,
        )
        return (1.0 - alpha**2) / (2.0**2.5 * math.pi) * value
    matrix = MomentMatrix(alpha=inp.alpha, beta=inp.beta)
    return gaussian_norm_expectation(matrix.as_array()) / math.sqrt(2.0 * math.pi)


def physical_length_constant(inp: KacRiceInput) -> float:
    """2 pi c1: expected length per unit area per unit R for fields in e(.) form."""
    return 2.0 * math.pi * expected_length_constant(inp)


def c1_monte_carlo(inp: KacRiceInput, n_draws: int, seed: int) -> tuple[float, float]:
    """Monte-Carlo estimate of c1 and its standard error from Gaussian draws."""
    _require_nondegenerate(inp)
    if n_draws < 2:
        raise InvalidInputError(f"n_draws must be >= 2, got {n_draws}")
    rng = np.random.default_rng(seed)
    draws = rng.multivariate_normal(
        np.zeros(2), MomentMatrix(alpha=inp.alpha, beta=inp.beta).as_array(), size=n_draws
    )
    norms = np.hypot(draws[:, 0], draws[:, 1]) / math.sqrt(2.0 * math.pi)
    return float(norms.mean()), float(norms.std(ddof=1) / math.sqrt(n_draws))


def c1_decreases_in_modulus(alphas: Iterable[float]) -> bool:
    """Whether c1(alpha, 0) < c1(0, 0) for every given alpha != 0."""
    base = expected_length_constant(KacRiceInput())
    values = {a: expected_length_constant(KacRiceInput(alpha=a)) for a in alphas}
    decreasing = all(v < base for a, v in values.items() if a != 0)
    logger.info(
        "c1(0,0)=%.10f; %s",
        base,
        ", ".join(f"c1({a},0)={v:.10f}" for a, v in values.items()),
    )
    return decreasing


def h_function(t: float, s: float, inp: KacRiceInput) -> float:
    """h(t, s) = sqrt((1 + t + t^2 D/4)(1 + s + s^2 D/4)), D = 1 - alpha^2 - beta^2."""
    if t < 0 or s < 0:
        raise InvalidInputError(f"h(t, s) needs t, s >= 0, got ({t}, {s})")
    d = 1.0 - inp.modulus_squared
    return math.sqrt((1.0 + t + t * t * d / 4.0) * (1.0 + s + s * s * d / 4.0))


def variance_constant_formula(inp: KacRiceInput) -> float:
    """(1/(2 pi^2)) (int_0^inf (1 - 1/h(t, 0)) t^{-3/2} dt)^2 - c1^2, evaluated literally.

    The substitution t = u^2 removes the endpoint singularity; the integral is
    truncated at t = 1e6 and the two leading terms of the tail expansion are
    added. The value is not the variance constant of the nodal length: Monte
    Carlo is the reference for that.
    """
    d = _require_nondegenerate(inp)
    upper = math.sqrt(TAIL_START)

    def _integrand(u: float) -> float:
        # 2 (1 - 1/h(u^2, 0)) / u^2, written without cancellation near u = 0
        t = u * u
        h = math.sqrt(1.0 + t + t * t * d / 4.0)
        return 2.0 * (1.0 + t * d / 4.0) / (h * (h + 1.0))

    body, _ = integrate.quad(
        _integrand, 0.0, upper, points=[1.0, 10.0, 100.0], epsabs=1e-12, epsrel=1e-12, limit=500
    )
    tail = 2.0 / math.sqrt(TAIL_START) - 4.0 / (3.0 * math.sqrt(d)) * TAIL_START**-1.5
    integral = body + tail
    value = integral**2 / (2.0 * math.pi**2) - expected_length_constant(inp) ** 2
    if inp.modulus_squared == 0.0:
        logger.warning(
            "variance formula evaluates to %.10f at mu_hat(2) = 0, although the "
            "variance constant is claimed to vanish there (c2 = 0); the "
            "Monte-Carlo variance is the reference",
            value,
        )
    return value


def berry_variance(scale: float) -> float:
    """Reference variance log(R) / (512 pi) of the random wave model."""
    if scale <= 1:
        raise InvalidInputError(f"R must exceed 1, got {scale}")
    return math.log(scale) / (512.0 * math.pi)
