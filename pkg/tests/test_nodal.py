"""Tests for marching-squares nodal lengths, doubling ratios and locality."""

import logging
import math

import numpy as np
import pytest

from nodal_lab.eigenfunction import build_bourgain, restrict, to_field
from nodal_lab.errors import DegenerateFieldError, InvalidInputError
from nodal_lab.fields import FunctionField
from nodal_lab.models import Disk, EigenfunctionSpec, FullTorus, PlanckWindow, Square
from nodal_lab.nodal import (
    UNIT_BOX,
    doubling_ratio,
    doubling_survey,
    locality_check,
    measure_once,
    nodal_length,
    nodal_length_planck,
    region_axes,
    relative_discrepancy,
)


def _linear(a: float, b: float, c: float) -> FunctionField:
    return FunctionField(lambda y1, y2: a * y1 + b * y2 + c, math.hypot(a, b))


class TestRegionAxes:
    """Tests for sampling grids."""

    def test_torus_grid_is_offset(self):
        xs, ys = region_axes(FullTorus(), 64)
        assert len(xs) == 65
        assert xs[0] == pytest.approx(0.5 / 64)
        assert xs[-1] - xs[0] == pytest.approx(1.0)
        assert np.array_equal(xs, ys)

    def test_square_grid_hits_boundary(self):
        xs, ys = region_axes(Square(center=(1.0, 2.0), half_side=0.25), 64)
        assert xs[0] == pytest.approx(0.75)
        assert ys[-1] == pytest.approx(2.25)


class TestNodalLength:
    """Tests for nodal_length on analytic fields."""

    def test_straight_line(self):
        estimate = nodal_length(_linear(1.0, 0.0, -0.1), UNIT_BOX)
        assert estimate.length == pytest.approx(1.0, abs=1e-12)
        assert estimate.converged
        assert estimate.cell_ambiguities == 0

    def test_diagonal_line(self):
        estimate = nodal_length(_linear(1.0, -1.0, 0.013), UNIT_BOX)
        assert estimate.length == pytest.approx(0.987 * math.sqrt(2.0), rel=1e-9)

    def test_chord_of_disk(self):
        disk = Disk(center=(0.0, 0.0), radius=0.3)
        estimate = nodal_length(_linear(1.0, 0.0, -0.05), disk)
        assert estimate.length == pytest.approx(2 * math.sqrt(0.09 - 0.0025), rel=1e-9)

    def test_cos_line_on_torus(self, cos_line: EigenfunctionSpec):
        estimate = nodal_length(to_field(cos_line), FullTorus())
        assert estimate.length == pytest.approx(6.0, rel=1e-3)
        assert estimate.history[0][0] == 64

    def test_bourgain_on_torus_is_stable(self, bourgain_25: EigenfunctionSpec):
        coarse = nodal_length(to_field(bourgain_25), FullTorus(), 256, refine=False)
        fine = nodal_length(to_field(bourgain_25), FullTorus(), 512, refine=False)
        assert coarse.length == pytest.approx(fine.length, rel=1e-2)

    def test_saddle_cell(self):
        field = FunctionField(lambda y1, y2: (y1 - 0.003) * (y2 - 0.004))
        single = measure_once(field, UNIT_BOX, 64)
        assert single.ambiguities == 1
        assert single.length == pytest.approx(2.0, abs=2.0 / 64)

    def test_no_crossing(self):
        estimate = nodal_length(FunctionField(lambda y1, y2: 1.0), UNIT_BOX)
        assert estimate.length == 0.0
        assert estimate.note == "no crossing detected"

    def test_single_pass(self, cos_line: EigenfunctionSpec):
        estimate = nodal_length(to_field(cos_line), FullTorus(), refine=False)
        assert estimate.converged
        assert len(estimate.history) == 1

    def test_unconverged_at_cap(self, cos_line: EigenfunctionSpec, caplog):
        with caplog.at_level(logging.WARNING, logger="nodal_lab"):
            estimate = nodal_length(to_field(cos_line), FullTorus(), 64, max_resolution=64)
        assert not estimate.converged
        assert "did not converge" in (estimate.note or "")
        assert "unconverged" in caplog.text

    @pytest.mark.parametrize("n", [32, 100])
    def test_rejects_bad_resolution(self, n: int):
        with pytest.raises(InvalidInputError):
            nodal_length(_linear(1.0, 0.0, 0.0), UNIT_BOX, n)

    def test_rejects_resolution_above_cap(self):
        with pytest.raises(InvalidInputError):
            nodal_length(_linear(1.0, 0.0, 0.0), UNIT_BOX, 256, max_resolution=128)

    def test_rotation_and_translation_invariance(self, bourgain_25: EigenfunctionSpec):
        field = to_field(bourgain_25)
        base = nodal_length(field, FullTorus()).length
        assert nodal_length(field.rotate90(), FullTorus()).length == pytest.approx(base, rel=5e-3)
        moved = field.translate((0.137, 0.421))
        assert nodal_length(moved, FullTorus()).length == pytest.approx(base, rel=5e-3)

    def test_disk_and_complement_fill_covering_square(self, bourgain_25: EigenfunctionSpec):
        field = to_field(bourgain_25)
        disk = Disk(center=(0.3, 0.4), radius=0.2)
        outside = Disk(center=(0.3, 0.4), radius=0.2, complement=True)
        square = Square(center=(0.3, 0.4), half_side=0.2)
        parts = [nodal_length(field, r, 256, refine=False).length for r in (disk, outside)]
        whole = nodal_length(field, square, 256, refine=False).length
        assert sum(parts) == pytest.approx(whole, rel=1e-9)
        assert min(parts) > 0.0
        assert outside.area == pytest.approx(0.16 - disk.area)

    @pytest.mark.parametrize("center", [(0.3, 0.7), (0.05, 0.5), (0.81, 0.12)])
    def test_refinement_changes_shrink(self, bourgain_25: EigenfunctionSpec, center):
        field = restrict(bourgain_25, PlanckWindow(center=center, scale=4.0))
        estimate = nodal_length(field, UNIT_BOX, 64, refine_tol=1e-7, max_resolution=1024)
        lengths = [length for _, length in estimate.history]
        changes = np.abs(np.diff(lengths))
        assert len(changes) >= 3
        assert np.all(np.diff(changes) <= 0.0)

    @pytest.mark.slow
    @pytest.mark.parametrize("lam", [325, 1105, 4225])
    def test_bourgain_length_near_random_wave_value(self, lam: int):
        estimate = nodal_length(to_field(build_bourgain(lam)), FullTorus())
        expected = math.pi / math.sqrt(2.0) * math.sqrt(lam)
        assert estimate.length == pytest.approx(expected, rel=0.07)


class TestPlanck:
    """Tests for window lengths."""

    def test_cos_line_window_has_2r_lines(self, cos_line: EigenfunctionSpec):
        estimate = nodal_length_planck(cos_line, (0.01, 0.2), 4.0)
        assert estimate.length == pytest.approx(8.0, rel=1e-9)

    def test_window_scale_must_be_at_least_one(self, cos_line: EigenfunctionSpec):
        with pytest.raises(ValueError):
            nodal_length_planck(cos_line, (0.0, 0.0), 0.5)


class TestDoubling:
    """Tests for doubling ratios and the rank survey."""

    def test_constant_field(self):
        box = Square(center=(0.0, 0.0), half_side=0.25)
        assert doubling_ratio(FunctionField(lambda y1, y2: 3.0), box, 64) == 0.0

    def test_linear_field(self):
        box = Square(center=(0.0, 0.0), half_side=0.25)
        ratio = doubling_ratio(FunctionField(lambda y1, y2: y1 + 0.0 * y2), box, 64)
        assert ratio == pytest.approx(math.log(2.0), rel=1e-12)

    def test_vanishing_field(self):
        box = Square(center=(0.0, 0.0), half_side=0.25)
        with pytest.raises(DegenerateFieldError):
            doubling_ratio(FunctionField(lambda y1, y2: 0.0), box, 64)

    def test_survey(self, bourgain_25: EigenfunctionSpec):
        survey = doubling_survey(bourgain_25, 3.0, 6, seed=4)
        assert len(survey.ratios) == len(survey.lengths) == 6
        assert -1.0 <= survey.spearman <= 1.0
        assert survey == doubling_survey(bourgain_25, 3.0, 6, seed=4, threads=3)

    def test_survey_needs_three_boxes(self, bourgain_25: EigenfunctionSpec):
        with pytest.raises(InvalidInputError):
            doubling_survey(bourgain_25, 3.0, 2, seed=4)


class TestLocality:
    """Tests for the comparison of L(f, B) with the window integral."""

    def test_cos_line(self, cos_line: EigenfunctionSpec):
        ball = Disk(center=(0.5, 0.5), radius=4.0)
        report = locality_check(cos_line, ball, 1.0, 20, seed=9)
        # Every unit window holds exactly two lines.
        assert report.rhs == pytest.approx(6.0 * math.pi * 16.0, rel=1e-9)
        assert report.standard_error == pytest.approx(0.0, abs=1e-9)
        assert report.discrepancy < 0.01
        assert report.lower <= report.rhs <= report.upper

    def test_radius_precondition(self, cos_line: EigenfunctionSpec):
        with pytest.raises(InvalidInputError):
            locality_check(cos_line, Disk(center=(0.5, 0.5), radius=1.0), 1.0, 20, seed=9)

    def test_rejects_complement_ball(self, cos_line: EigenfunctionSpec):
        ball = Disk(center=(0.5, 0.5), radius=4.0, complement=True)
        with pytest.raises(InvalidInputError):
            locality_check(cos_line, ball, 1.0, 20, seed=9)

    def test_relative_discrepancy_when_lhs_vanishes(self):
        assert relative_discrepancy(2.0, 2.5) == pytest.approx(0.25)
        assert relative_discrepancy(0.0, 0.3) == math.inf
        assert relative_discrepancy(0.0, 0.0) == 0.0

    @pytest.mark.slow
    def test_bourgain_window_integral_matches(self):
        spec = build_bourgain(1105)
        ball = Disk(center=(0.5, 0.5), radius=1.3)
        report = locality_check(spec, ball, 4.0, 40, seed=2, threads=4)
        assert abs(report.lhs - report.rhs) <= max(0.02 * report.lhs, 3.0 * report.standard_error)
