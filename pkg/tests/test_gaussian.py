"""Tests for Gaussian random waves and their Monte-Carlo nodal statistics."""

import math
from pathlib import Path

import numpy as np
import pytest

from nodal_lab.errors import DegenerateMeasureError, InvalidInputError
from nodal_lab.gaussian import (
    antipodal_pairs,
    discretize_measure,
    export_samples,
    mc_nodal_statistics,
    sample_field,
)
from nodal_lab.kacrice import physical_length_constant
from nodal_lab.measure import (
    atomic_from_angles,
    covariance,
    eight_arc_measure,
    fourier_moment,
    four_atom_measure,
    lebesgue,
)
from nodal_lab.models import KacRiceInput


class TestDiscretize:
    """Tests for turning continuous measures into antipodal atoms."""

    def test_lebesgue_roots_of_unity(self):
        mu = discretize_measure(lebesgue(), 8)
        angles = sorted(a.angle for a in mu.atoms)
        assert np.allclose(angles, 2 * np.pi * np.arange(8) / 8)
        assert all(a.weight == pytest.approx(1 / 8) for a in mu.atoms)

    def test_eight_arc_keeps_second_moment(self):
        mu = discretize_measure(eight_arc_measure(), 64)
        assert len(mu.atoms) == 64
        exact = fourier_moment(eight_arc_measure(), 2).value
        assert abs(fourier_moment(mu, 2).value - exact) < 1e-2

    def test_atomic_passes_through(self):
        mu = four_atom_measure()
        assert discretize_measure(mu, 6) is mu

    @pytest.mark.parametrize("n", [2, 7])
    def test_rejects_bad_atom_count(self, n: int):
        with pytest.raises(InvalidInputError):
            discretize_measure(lebesgue(), n)


class TestSampleField:
    """Tests for single realisations."""

    def test_same_seed_same_field(self):
        mu = discretize_measure(lebesgue(), 32)
        a = sample_field(mu, 5.0, seed=1)
        b = sample_field(mu, 5.0, seed=1)
        c = sample_field(mu, 5.0, seed=2)
        y = np.linspace(-0.5, 0.5, 11)
        assert np.array_equal(a.values(y, y), b.values(y, y))
        assert not np.array_equal(a.values(y, y), c.values(y, y))

    def test_pairs(self):
        directions, weights = antipodal_pairs(four_atom_measure())
        assert directions.shape == (2, 2)
        assert np.allclose(weights, [0.5, 0.5])

    def test_unit_variance(self):
        mu = discretize_measure(lebesgue(), 64)
        values = [sample_field(mu, 3.0, seed=s).field(0.1, 0.2) for s in range(2000)]
        assert np.var(values) == pytest.approx(1.0, abs=0.1)

    def test_covariance_matches_measure(self):
        mu = discretize_measure(eight_arc_measure(), 64)
        y, y_prime = (0.1, 0.2), (0.25, 0.1)
        products = []
        for seed in range(4000):
            sample = sample_field(mu, 3.0, seed=seed)
            products.append(sample.field(*y) * sample.field(*y_prime))
        values = np.array(products)
        lag = (3.0 * (y[0] - y_prime[0]), 3.0 * (y[1] - y_prime[1]))
        se = values.std(ddof=1) / math.sqrt(len(values))
        assert abs(values.mean() - covariance(mu, lag)) < 4 * se

    def test_gradient_matches_field(self):
        mu = discretize_measure(lebesgue(), 16)
        sample = sample_field(mu, 2.0, seed=5)
        g1, _ = sample.gradient(np.array([0.1]), np.array([0.3]))
        h = 1e-6
        fd = (sample.field(0.1 + h, 0.3) - sample.field(0.1 - h, 0.3)) / (2 * h)
        assert g1[0] == pytest.approx(fd, abs=1e-5)

    def test_needs_atomic_measure(self):
        with pytest.raises(InvalidInputError):
            sample_field(lebesgue(), 5.0, seed=0)

    def test_rejects_degenerate_measure(self):
        with pytest.raises(DegenerateMeasureError):
            sample_field(atomic_from_angles([0.0, math.pi]), 5.0, seed=0)

    def test_rejects_nonpositive_scale(self):
        with pytest.raises(InvalidInputError):
            sample_field(four_atom_measure(), 0.0, seed=0)


class TestStatistics:
    """Tests for mc_nodal_statistics."""

    def test_mean_near_kac_rice(self):
        stats = mc_nodal_statistics(lebesgue(), 2.0, 30, seed=17, n_atoms=64)
        expected = physical_length_constant(KacRiceInput()) * 2.0
        assert stats.mean == pytest.approx(expected, rel=0.2)
        assert stats.standard_error == pytest.approx(
            math.sqrt(stats.variance / 30)
        )
        assert len(stats.seeds) == len(set(stats.seeds)) == 30

    def test_threads_do_not_change_results(self):
        serial = mc_nodal_statistics(four_atom_measure(), 2.0, 30, seed=3)
        threaded = mc_nodal_statistics(four_atom_measure(), 2.0, 30, seed=3, threads=4)
        assert serial == threaded

    def test_needs_thirty_samples(self):
        with pytest.raises(InvalidInputError):
            mc_nodal_statistics(lebesgue(), 2.0, 10, seed=0)

    def test_translated_square_has_same_statistics(self):
        here = mc_nodal_statistics(lebesgue(), 4.0, 30, seed=21, n_atoms=64)
        there = mc_nodal_statistics(
            lebesgue(), 4.0, 30, seed=21, n_atoms=64, center=(7.3, -2.1)
        )
        assert here.seeds == there.seeds
        spread = math.hypot(here.standard_error, there.standard_error)
        assert abs(here.mean - there.mean) < 3 * spread

    def test_export(self, tmp_path: Path):
        stats = mc_nodal_statistics(four_atom_measure(), 2.0, 30, seed=3)
        path = export_samples(stats, tmp_path / "rwm.csv", "# run\n")
        lines = path.read_text().splitlines()
        assert lines[0] == "# run"
        assert lines[1] == "sample_index,seed,length,converged"
        assert len(lines) == 32
        assert lines[2].startswith(f"0,{stats.seeds[0]},")

    @pytest.mark.slow
    def test_isotropic_mean_at_scale_32(self):
        stats = mc_nodal_statistics(lebesgue(), 32.0, 200, seed=7, threads=4)
        expected = physical_length_constant(KacRiceInput()) * 32.0
        assert abs(stats.mean - expected) < 3 * stats.standard_error + 1e-2 * expected

    @pytest.mark.slow
    def test_isotropic_variance_shrinks_relative_to_scale(self):
        ratios = [
            mc_nodal_statistics(lebesgue(), r, 200, seed=7, threads=4).variance / r**2
            for r in (8.0, 16.0, 32.0)
        ]
        assert ratios[0] > ratios[1] > ratios[2]

    @pytest.mark.slow
    def test_eight_arc_variance_dominates_isotropic(self):
        arcs = mc_nodal_statistics(eight_arc_measure(), 32.0, 200, seed=7, threads=4)
        iso = mc_nodal_statistics(lebesgue(), 32.0, 200, seed=7, threads=4)
        assert arcs.variance >= 5.0 * iso.variance
