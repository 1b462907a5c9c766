"""Tests for Pydantic models."""

import math

import pytest
from pydantic import TypeAdapter, ValidationError

from nodal_lab.models import (
    Arc,
    ArcUniformMeasure,
    Atom,
    AtomicMeasure,
    Axis,
    Coefficient,
    CorrelationReport,
    DirectionMeasure,
    Disk,
    EigenfunctionSpec,
    FullTorus,
    KacRiceInput,
    LabConfig,
    LatticeCircle,
    LatticePoint,
    LebesgueMeasure,
    LengthDistribution,
    McStatistics,
    MomentMatrix,
    Region,
    Square,
)


class TestEnums:
    """Tests for enum definitions."""

    def test_axis_values(self):
        assert Axis.FIRST.value == "first"
        assert Axis.SECOND.value == "second"
        assert Axis("full-vector") is Axis.FULL


class TestLatticeModels:
    """Tests for lattice points, circles and reports."""

    def test_point(self):
        p = LatticePoint(3, -4)
        assert p.norm2 == 25
        assert -p == LatticePoint(-3, 4)
        assert 0 <= p.angle < 2 * math.pi
        assert LatticePoint(0, -1).angle == pytest.approx(1.5 * math.pi)

    def test_circle_rejects_off_circle_points(self):
        with pytest.raises(ValidationError):
            LatticeCircle(lambda_=25, points=[LatticePoint(5, 1)])

    def test_report_aliases(self):
        report = CorrelationReport(lambda_=25, ell=2, axis=Axis.FIRST)
        data = report.model_dump(mode="json", by_alias=True)
        assert data["lambda"] == 25
        assert data["nontrivialTuples"] == []
        assert not report.has_nontrivial


class TestMeasureModels:
    """Tests for the direction-measure union."""

    def test_atomic_needs_unit_mass(self):
        with pytest.raises(ValidationError):
            AtomicMeasure(atoms=[Atom(angle=0.0, weight=0.4), Atom(angle=math.pi, weight=0.4)])

    def test_atomic_needs_antipodes(self):
        with pytest.raises(ValidationError):
            AtomicMeasure(atoms=[Atom(angle=0.0, weight=0.5), Atom(angle=1.0, weight=0.5)])

    def test_atom_angle_range(self):
        with pytest.raises(ValidationError):
            Atom(angle=7.0, weight=1.0)

    def test_arc_must_be_ordered(self):
        with pytest.raises(ValidationError):
            Arc(start=1.0, end=0.5, mass=1.0)

    def test_arc_mixture_needs_partners(self):
        with pytest.raises(ValidationError):
            ArcUniformMeasure(arcs=[Arc(start=0.0, end=math.pi / 4, mass=1.0)])

    def test_discriminated_union(self):
        adapter = TypeAdapter(DirectionMeasure)
        assert isinstance(adapter.validate_python({"type": "lebesgue"}), LebesgueMeasure)
        mu = adapter.validate_json(
            '{"type": "atomic", "atoms": [{"angle": 0.0, "weight": 0.5},'
            ' {"angle": 3.141592653589793, "weight": 0.5}]}'
        )
        assert isinstance(mu, AtomicMeasure)
        with pytest.raises(ValidationError):
            adapter.validate_python({"type": "gaussian"})

    def test_moment_matrix(self):
        m = MomentMatrix(alpha=0.6, beta=0.0)
        assert m.l11 == pytest.approx(0.8)
        assert m.l22 == pytest.approx(0.2)
        assert m.det == pytest.approx(0.16)
        assert not m.degenerate
        assert MomentMatrix(alpha=0.0, beta=1.0).degenerate


class TestEigenfunctionSpec:
    """Tests for Hermitian coefficient lists."""

    def _coefficient(self, x1: int, x2: int, re: float, im: float = 0.0) -> Coefficient:
        return Coefficient(xi=LatticePoint(x1, x2), re=re, im=im)

    def test_hermitian_pair(self):
        spec = EigenfunctionSpec(
            lambda_=1,
            coefficients=[self._coefficient(1, 0, 0.5, 0.5), self._coefficient(-1, 0, 0.5, -0.5)],
        )
        assert spec.l2_norm_squared == pytest.approx(1.0)
        assert spec.frequencies().shape == (2, 2)

    def test_rejects_non_conjugate_partner(self):
        with pytest.raises(ValidationError):
            EigenfunctionSpec(
                lambda_=1,
                coefficients=[
                    self._coefficient(1, 0, 0.5, 0.5),
                    self._coefficient(-1, 0, 0.5, 0.5),
                ],
            )

    def test_rejects_duplicates(self):
        with pytest.raises(ValidationError):
            EigenfunctionSpec(
                lambda_=1,
                coefficients=[
                    self._coefficient(1, 0, 0.5),
                    self._coefficient(1, 0, 0.5),
                    self._coefficient(-1, 0, 0.5),
                ],
            )

    def test_rejects_point_off_circle(self):
        with pytest.raises(ValidationError):
            EigenfunctionSpec(
                lambda_=2,
                coefficients=[self._coefficient(1, 0, 0.5), self._coefficient(-1, 0, 0.5)],
            )

    def test_serialises_lambda_alias(self):
        spec = EigenfunctionSpec.model_validate(
            {
                "lambda": 1,
                "coefficients": [
                    {"xi": [0, 1], "re": 0.5, "im": 0.0},
                    {"xi": [0, -1], "re": 0.5, "im": 0.0},
                ],
            }
        )
        assert spec.lambda_ == 1
        assert spec.model_dump(by_alias=True)["lambda"] == 1


class TestRegions:
    """Tests for regions."""

    def test_areas(self):
        assert Square(half_side=0.25).area == pytest.approx(0.25)
        assert Disk(radius=1.0).area == pytest.approx(math.pi)
        assert FullTorus().area == 1.0

    def test_region_union(self):
        region = TypeAdapter(Region).validate_python({"shape": "disk", "radius": 0.3})
        assert isinstance(region, Disk)

    def test_disk_needs_positive_radius(self):
        with pytest.raises(ValidationError):
            Disk(radius=0.0)


class TestStatisticsModels:
    """Tests for Monte-Carlo and distribution models."""

    def test_unconverged_count(self):
        stats = McStatistics(
            n_samples=3,
            scale=2.0,
            mean=1.0,
            variance=0.1,
            standard_error=0.2,
            lengths=[1.0, 1.1, 0.9],
            seeds=[1, 2, 3],
            converged=[True, False, True],
        )
        assert stats.unconverged == 1

    def test_kac_rice_input(self):
        assert KacRiceInput(alpha=0.6, beta=0.8).modulus_squared == pytest.approx(1.0)
        with pytest.raises(ValidationError):
            KacRiceInput(alpha=1.1)

    def test_equidist_fraction(self):
        dist = LengthDistribution(
            lambda_=25,
            scale=4.0,
            n_x=4,
            samples=[1.0, 1.04, 1.2, 0.5],
            mean=0.935,
            variance=0.1,
            standard_error=0.1,
            reference=1.0,
            bin_edges=[0.0, 3.0],
            histogram=[4],
        )
        assert dist.equidist_fraction(0.05) == pytest.approx(0.5)
        assert dist.equidist_fraction(0.6) == 0.0

    def test_histogram_counts_nonnegative(self):
        with pytest.raises(ValidationError):
            LengthDistribution(
                lambda_=25,
                scale=4.0,
                n_x=1,
                samples=[1.0],
                mean=1.0,
                variance=0.0,
                standard_error=0.0,
                reference=1.0,
                bin_edges=[0.0, 3.0],
                histogram=[-1],
            )


class TestLabConfig:
    """Tests for the config-file model."""

    def test_default_map_skips_empty_groups(self):
        config = LabConfig(threads=2, nodal={"length": {"resolution": 256}})
        assert config.default_map() == {"nodal": {"length": {"resolution": 256}}}

    def test_rejects_unknown_keys(self):
        with pytest.raises(ValidationError):
            LabConfig.model_validate({"plots": {}})
