"""Pydantic models for every value that crosses a module or file boundary."""

import math
from enum import Enum
from typing import Annotated, Any, Literal, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

TWO_PI = 2.0 * math.pi

# Tolerances shared by the validators below.
MASS_TOL = 1e-12
ANGLE_TOL = 1e-12
DEGENERATE_DET = 1e-12


class Axis(str, Enum):
    """Which projection of the lattice points a correlation search sums."""

    FIRST = "first"
    SECOND = "second"
    FULL = "full-vector"


# =============================================================================
# Lattice arithmetic
# =============================================================================


class LatticePoint(NamedTuple):
    """A point of Z^2; serialises as ``[x1, x2]``."""

    x1: int
    x2: int

    @property
    def norm2(self) -> int:
        return self.x1 * self.x1 + self.x2 * self.x2

    @property
    def angle(self) -> float:
        """Polar angle in [0, 2pi)."""
        theta = math.atan2(self.x2, self.x1)
        return theta + TWO_PI if theta < 0 else theta

    def __neg__(self) -> "LatticePoint":
        return LatticePoint(-self.x1, -self.x2)


class LatticeCircle(BaseModel):
    """All lattice points on the circle |xi|^2 = lambda, sorted by angle."""

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    lambda_: int = Field(alias="lambda", ge=1)
    points: list[LatticePoint] = Field(default_factory=list)

    @model_validator(mode="after")
    def _points_on_circle(self) -> "LatticeCircle":
        for p in self.points:
            if p.norm2 != self.lambda_:
                raise ValueError(f"{tuple(p)} is not on |xi|^2 = {self.lambda_}")
        return self

    @property
    def multiplicity(self) -> int:
        return len(self.points)


class CorrelationReport(BaseModel):
    """Result of an exhaustive 2*ell-fold sum search over one lattice circle."""

    model_config = ConfigDict(populate_by_name=True)

    lambda_: int = Field(alias="lambda")
    ell: int = Field(ge=1)
    axis: Axis
    nontrivial_tuples: list[tuple[int, ...] | tuple[LatticePoint, ...]] = Field(
        default_factory=list, alias="nontrivialTuples"
    )
    min_nonzero_abs: float | None = Field(None, alias="minNonzeroAbs")
    delta: float | None = None
    ratio_to_bound: float | None = Field(None, alias="ratioToBound")
    strategy: Literal["direct", "meet-in-the-middle"] = "direct"
    raw_candidates: int = Field(0, alias="rawCandidates")

    @property
    def has_nontrivial(self) -> bool:
        return bool(self.nontrivial_tuples)


class ScanEntry(BaseModel):
    """One eigenvalue of an admissibility scan."""

    model_config = ConfigDict(populate_by_name=True)

    lambda_: int = Field(alias="lambda")
    has_nontrivial_semi_correlation: bool = Field(
        alias="hasNontrivialSemiCorrelation"
    )
    running_density: float = Field(alias="runningDensity")


class ScanReport(BaseModel):
    """Admissibility flags for all lambda <= X in S."""

    model_config = ConfigDict(populate_by_name=True)

    x_bound: int = Field(alias="xBound")
    ell: int
    entries: list[ScanEntry] = Field(default_factory=list)
    truncated: bool = False


# =============================================================================
# Spectral measures
# =============================================================================


def _angle_in_list(theta: float, angles: list[float]) -> int | None:
    for i, a in enumerate(angles):
        d = abs((theta - a + math.pi) % TWO_PI - math.pi)
        if d <= 1e-9:
            return i
    return None


class Atom(BaseModel):
    model_config = ConfigDict(frozen=True)

    angle: float = Field(ge=0.0, lt=TWO_PI)
    weight: float = Field(gt=0.0)


class Arc(BaseModel):
    """Uniform mass on the angular interval [start, end)."""

    model_config = ConfigDict(frozen=True)

    start: float
    end: float
    mass: float = Field(gt=0.0)

    @model_validator(mode="after")
    def _ordered(self) -> "Arc":
        if not self.end > self.start:
            raise ValueError("arc end must exceed start")
        if self.end - self.start > TWO_PI + ANGLE_TOL:
            raise ValueError("arc longer than the full circle")
        return self

    @property
    def width(self) -> float:
        return self.end - self.start


class AtomicMeasure(BaseModel):
    """Finitely many atoms on the unit circle, in antipodal pairs."""

    model_config = ConfigDict(frozen=True)

    type: Literal["atomic"] = "atomic"
    atoms: list[Atom]

    @model_validator(mode="after")
    def _probability_and_symmetric(self) -> "AtomicMeasure":
        total = math.fsum(a.weight for a in self.atoms)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"atom weights sum to {total!r}, expected 1")
        angles = [a.angle for a in self.atoms]
        for atom in self.atoms:
            j = _angle_in_list((atom.angle + math.pi) % TWO_PI, angles)
            if j is None or abs(self.atoms[j].weight - atom.weight) > MASS_TOL:
                raise ValueError(f"atom at {atom.angle!r} has no antipodal partner")
        return self


class ArcUniformMeasure(BaseModel):
    """Mixture of uniform arcs; every arc comes with its antipodal translate."""

    model_config = ConfigDict(frozen=True)

    type: Literal["arc-uniform"] = "arc-uniform"
    arcs: list[Arc]

    @model_validator(mode="after")
    def _probability_and_symmetric(self) -> "ArcUniformMeasure":
        total = math.fsum(a.mass for a in self.arcs)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"arc masses sum to {total!r}, expected 1")
        for arc in self.arcs:
            partner = [
                b
                for b in self.arcs
                if _angle_in_list((arc.start + math.pi) % TWO_PI, [b.start % TWO_PI])
                is not None
                and abs(b.width - arc.width) <= 1e-9
                and abs(b.mass - arc.mass) <= MASS_TOL
            ]
            if not partner:
                raise ValueError(f"arc [{arc.start}, {arc.end}) has no antipodal partner")
        return self


class LebesgueMeasure(BaseModel):
    """Normalised arc length on the unit circle."""

    model_config = ConfigDict(frozen=True)

    type: Literal["lebesgue"] = "lebesgue"


DirectionMeasure = Annotated[
    AtomicMeasure | ArcUniformMeasure | LebesgueMeasure, Field(discriminator="type")
]


class ComplexMoment(BaseModel):
    """A Fourier moment mu_hat(k)."""

    model_config = ConfigDict(frozen=True)

    re: float
    im: float

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def __abs__(self) -> float:
        return math.hypot(self.re, self.im)


class MomentMatrix(BaseModel):
    """Covariance of R^{-1} grad F: [[1/2 + a/2, b/2], [b/2, 1/2 - a/2]]."""

    model_config = ConfigDict(frozen=True)

    alpha: float
    beta: float

    @property
    def l11(self) -> float:
        return 0.5 + 0.5 * self.alpha

    @property
    def l22(self) -> float:
        return 0.5 - 0.5 * self.alpha

    @property
    def l12(self) -> float:
        return 0.5 * self.beta

    @property
    def trace(self) -> float:
        return self.l11 + self.l22

    @property
    def det(self) -> float:
        return 0.25 * (1.0 - self.alpha**2 - self.beta**2)

    @property
    def degenerate(self) -> bool:
        return self.det < DEGENERATE_DET

    def as_array(self) -> np.ndarray:
        return np.array([[self.l11, self.l12], [self.l12, self.l22]])


# =============================================================================
# Eigenfunctions
# =============================================================================


class Coefficient(BaseModel):
    """One Fourier coefficient a_xi; serialises as ``{xi: [a, b], re, im}``."""

    model_config = ConfigDict(frozen=True)

    xi: LatticePoint
    re: float
    im: float

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


class EigenfunctionSpec(BaseModel):
    """f(x) = sum_xi a_xi e(<xi, x>) over |xi|^2 = lambda.

    Hermitian symmetry and circle membership are enforced here; unit L2 norm is
    checked by the operations that need it so that unnormalised specs can still
    be loaded and diagnosed.
    """

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    lambda_: int = Field(alias="lambda", ge=1)
    coefficients: list[Coefficient]

    @model_validator(mode="after")
    def _hermitian(self) -> "EigenfunctionSpec":
        table = {c.xi: c.value for c in self.coefficients}
        if len(table) != len(self.coefficients):
            raise ValueError("duplicate frequency in coefficient list")
        for xi, a in table.items():
            if xi.norm2 != self.lambda_:
                raise ValueError(f"{tuple(xi)} is not on |xi|^2 = {self.lambda_}")
            partner = table.get(-xi)
            if partner is None or abs(partner - a.conjugate()) > 1e-12:
                raise ValueError(f"a_{tuple(-xi)} must equal conj(a_{tuple(xi)})")
        return self

    @property
    def l2_norm_squared(self) -> float:
        return math.fsum(abs(c.value) ** 2 for c in self.coefficients)

    def frequencies(self) -> np.ndarray:
        return np.array([c.xi for c in self.coefficients], dtype=float).reshape(-1, 2)

    def amplitudes(self) -> np.ndarray:
        return np.array([c.value for c in self.coefficients], dtype=complex)


class PlanckWindow(BaseModel):
    """Box B(x, R/sqrt(lambda)) viewed in coordinates y in [-1/2, 1/2]^2."""

    model_config = ConfigDict(frozen=True)

    center: tuple[float, float] = (0.0, 0.0)
    scale: float = Field(1.0, ge=1.0)


# =============================================================================
# Regions and nodal estimates
# =============================================================================


class Square(BaseModel):
    model_config = ConfigDict(frozen=True)

    shape: Literal["square"] = "square"
    center: tuple[float, float] = (0.0, 0.0)
    half_side: float = Field(0.5, gt=0.0)

    @property
    def area(self) -> float:
        return (2.0 * self.half_side) ** 2


class Disk(BaseModel):
    """A disk, or with ``complement`` the rest of its covering square."""

    model_config = ConfigDict(frozen=True)

    shape: Literal["disk"] = "disk"
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = Field(gt=0.0)
    complement: bool = False

    @property
    def area(self) -> float:
        inside = math.pi * self.radius**2
        return (2.0 * self.radius) ** 2 - inside if self.complement else inside


class FullTorus(BaseModel):
    """One fundamental domain [0, 1)^2 of R^2 / Z^2."""

    model_config = ConfigDict(frozen=True)

    shape: Literal["torus"] = "torus"

    @property
    def area(self) -> float:
        return 1.0


Region = Annotated[Square | Disk | FullTorus, Field(discriminator="shape")]


class NodalEstimate(BaseModel):
    """Polyline length of the zero set with its refinement history."""

    length: float = Field(ge=0.0)
    resolution: int
    refinement_error: float = Field(ge=0.0)
    cell_ambiguities: int = 0
    history: list[tuple[int, float]] = Field(default_factory=list)
    converged: bool = True
    note: str | None = None


class LocalityReport(BaseModel):
    """L(f, B) against (sqrt(lambda)/R) * integral over B of L(F_x)."""

    lhs: float
    rhs: float
    discrepancy: float
    standard_error: float
    lower: float
    upper: float
    n_mc: int


class DoublingSurvey(BaseModel):
    """Doubling ratios paired with window nodal lengths over random boxes."""

    ratios: list[float]
    lengths: list[float]
    spearman: float
    p_value: float


# =============================================================================
# Gaussian fields, Kac-Rice, log-lab
# =============================================================================


class McStatistics(BaseModel):
    """Monte-Carlo statistics of L(F_mu, B(1))."""

    n_samples: int
    scale: float
    mean: float
    variance: float = Field(ge=0.0)
    standard_error: float = Field(ge=0.0)
    lengths: list[float]
    seeds: list[int]
    converged: list[bool]

    @property
    def unconverged(self) -> int:
        return sum(not c for c in self.converged)


class KacRiceInput(BaseModel):
    """mu_hat(2) = alpha + i beta."""

    model_config = ConfigDict(frozen=True)

    alpha: float = 0.0
    beta: float = 0.0

    @model_validator(mode="after")
    def _inside_disk(self) -> "KacRiceInput":
        if self.alpha**2 + self.beta**2 > 1.0 + 1e-12:
            raise ValueError("alpha^2 + beta^2 must not exceed 1")
        return self

    @property
    def modulus_squared(self) -> float:
        return self.alpha**2 + self.beta**2


class MomentReport(BaseModel):
    """A quadrature or Monte-Carlo moment with its error estimate."""

    p: int = Field(ge=1)
    value: float = Field(ge=0.0)
    resolution: int
    subdivision_depth: int = 0
    error_estimate: float = Field(0.0, ge=0.0)
    converged: bool = True
    capped_fraction: float = 0.0
    n_x: int | None = None
    scale: float | None = None
    history: list[float] = Field(default_factory=list)


class SmallValueFit(BaseModel):
    """Fit vol{|f| <= delta} ~ C (-log delta)^(-q)."""

    deltas: list[float]
    volumes: list[float]
    exponent: float
    log_constant: float


class LengthDistribution(BaseModel):
    """Distribution of L(F_x)/R over uniformly random centres x."""

    model_config = ConfigDict(populate_by_name=True)

    lambda_: int = Field(alias="lambda")
    scale: float
    n_x: int
    samples: list[float]
    mean: float
    variance: float = Field(ge=0.0)
    standard_error: float = Field(ge=0.0)
    reference: float
    bin_edges: list[float]
    histogram: list[int]
    equidist: dict[float, float] = Field(default_factory=dict)
    unconverged: int = 0

    @field_validator("histogram")
    @classmethod
    def _nonnegative(cls, v: list[int]) -> list[int]:
        if any(c < 0 for c in v):
            raise ValueError("histogram counts must be nonnegative")
        return v

    def equidist_fraction(self, eps: float) -> float:
        """Share of samples with |L/R - reference| / reference > eps."""
        arr = np.asarray(self.samples)
        return float(np.mean(np.abs(arr - self.reference) > eps * self.reference))


# =============================================================================
# Experiment configuration
# =============================================================================


class ExperimentConfig(BaseModel):
    """Resolved parameters of one CLI run, recorded in every output header."""

    model_config = ConfigDict(populate_by_name=True)

    command: str
    params: dict[str, Any] = Field(default_factory=dict)
    seed: int | None = None
    threads: int = Field(1, ge=1)


CommandDefaults = dict[str, dict[str, Any]]


class LabConfig(BaseModel):
    """A config file: default option values per command group and command.

    Keys below each group are command names, values map option names to
    defaults; flags given on the command line take precedence.
    """

    model_config = ConfigDict(extra="forbid")

    threads: int | None = Field(None, ge=1)
    lattice: CommandDefaults = Field(default_factory=dict)
    eigen: CommandDefaults = Field(default_factory=dict)
    nodal: CommandDefaults = Field(default_factory=dict)
    measure: CommandDefaults = Field(default_factory=dict)
    rwm: CommandDefaults = Field(default_factory=dict)
    kacrice: CommandDefaults = Field(default_factory=dict)
    loglab: CommandDefaults = Field(default_factory=dict)

    def default_map(self) -> dict[str, Any]:
        """Nested defaults in the shape click's ``default_map`` expects."""
        return {
            group: commands
            for group, commands in self.model_dump(exclude={"threads"}).items()
            if commands
        }
