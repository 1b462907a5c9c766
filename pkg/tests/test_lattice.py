"""Tests for lattice arithmetic and correlation searches."""

import logging
import math
from collections import Counter
from itertools import product

import pytest

from nodal_lab.errors import BudgetExceededError, InvalidInputError
from nodal_lab.lattice import (
    DEFAULT_BUDGET,
    MITM_THRESHOLD,
    _pick_strategy,
    difference_multiplicity,
    difference_set,
    find_correlations,
    find_semi_correlations,
    is_lambda_p_admissible,
    is_sum_of_two_squares,
    is_trivial,
    lattice_points,
    min_quasi_correlation,
    multiplicity,
    r2_divisor_formula,
    require_eigenvalue,
    scan_admissible_eigenvalues,
)
from nodal_lab.models import Axis, LatticePoint


def _oracle_semi(lam: int, ell: int, axis: Axis) -> set[tuple[int, ...]]:
    """Nested-loop search over ordered tuples of distinct projections."""
    index = 0 if axis is Axis.FIRST else 1
    values = sorted({p[index] for p in lattice_points(lam).points})
    found = set()
    for tup in product(values, repeat=2 * ell):
        if sum(tup) != 0:
            continue
        counts = Counter(tup)
        paired = all(
            counts[v] % 2 == 0 if v == 0 else counts[v] == counts[-v] for v in counts
        )
        if not paired:
            found.add(tuple(sorted(tup, reverse=True)))
    return found


class TestSumsOfTwoSquares:
    """Tests for membership in S and the divisor formula."""

    @pytest.mark.parametrize("n", [1, 2, 5, 9, 25, 45, 65, 325])
    def test_members(self, n: int):
        assert is_sum_of_two_squares(n)

    @pytest.mark.parametrize("n", [3, 6, 7, 21, 27])
    def test_non_members(self, n: int):
        assert not is_sum_of_two_squares(n)

    def test_rejects_nonpositive(self):
        with pytest.raises(InvalidInputError):
            is_sum_of_two_squares(0)

    @pytest.mark.parametrize(
        ("lam", "n"), [(1, 4), (2, 4), (5, 8), (25, 12), (65, 16), (325, 24), (3, 0)]
    )
    def test_multiplicity(self, lam: int, n: int):
        assert multiplicity(lam) == n
        assert r2_divisor_formula(lam) == n

    def test_divisor_formula_matches_enumeration(self):
        for lam in range(1, 400):
            assert r2_divisor_formula(lam) == len(lattice_points(lam).points)


class TestLatticePoints:
    """Tests for the enumeration of lattice circles."""

    def test_lambda_25(self):
        circle = lattice_points(25)
        assert circle.multiplicity == 12
        assert circle.points[0] == LatticePoint(5, 0)
        assert LatticePoint(-3, 4) in circle.points

    def test_sorted_by_angle(self):
        angles = [p.angle for p in lattice_points(1105).points]
        assert angles == sorted(angles)
        assert all(0 <= a < 2 * math.pi for a in angles)

    def test_symmetric_under_negation(self):
        points = set(lattice_points(325).points)
        assert {-p for p in points} == points

    def test_empty_circle(self):
        assert lattice_points(3).points == []

    def test_require_eigenvalue_rejects_non_members(self):
        with pytest.raises(InvalidInputError):
            require_eigenvalue(3)


class TestTriviality:
    """Tests for the perfect-pairing check."""

    def test_pairing(self):
        assert is_trivial([(1,), (-1,), (2,), (-2,)])
        assert is_trivial([(0,), (0,)])

    def test_not_pairing(self):
        assert not is_trivial([(5,), (3,), (-4,), (-4,)])
        assert not is_trivial([(0,)])


class TestCorrelations:
    """Tests for correlation and semi-correlation searches."""

    def test_no_two_correlations(self):
        for lam in (5, 25, 65):
            assert not find_correlations(lam, 1).has_nontrivial

    def test_no_four_correlations_on_circles(self):
        for lam in (25, 65, 85):
            assert not find_correlations(lam, 2).has_nontrivial

    def test_correlations_need_eigenvalue(self):
        with pytest.raises(InvalidInputError):
            find_correlations(3, 1)

    def test_semi_correlation_witness_at_25(self):
        report = find_semi_correlations(25, 2, Axis.FIRST)
        assert report.has_nontrivial
        assert (5, 3, -4, -4) in report.nontrivial_tuples

    def test_no_semi_correlations_at_5(self):
        for axis in (Axis.FIRST, Axis.SECOND):
            assert not find_semi_correlations(5, 2, axis).has_nontrivial

    def test_semi_correlations_reject_full_axis(self):
        with pytest.raises(InvalidInputError):
            find_semi_correlations(25, 2, Axis.FULL)

    def test_semi_correlations_outside_s_are_empty(self):
        assert find_semi_correlations(3, 2).nontrivial_tuples == []

    @pytest.mark.parametrize("ell", [1, 2])
    def test_matches_nested_loop_oracle(self, ell: int):
        for lam in range(1, 201):
            if not is_sum_of_two_squares(lam):
                continue
            for axis in (Axis.FIRST, Axis.SECOND):
                found = set(find_semi_correlations(lam, ell, axis).nontrivial_tuples)
                assert found == _oracle_semi(lam, ell, axis), (lam, axis)

    @pytest.mark.slow
    def test_matches_oracle_up_to_500(self):
        for lam in range(201, 501):
            if not is_sum_of_two_squares(lam):
                continue
            found = set(find_semi_correlations(lam, 2, Axis.FIRST).nontrivial_tuples)
            assert found == _oracle_semi(lam, 2, Axis.FIRST), lam

    @pytest.mark.parametrize("lam", [25, 65, 85])
    @pytest.mark.parametrize("ell", [2, 3])
    def test_strategies_agree(self, lam: int, ell: int):
        direct = find_semi_correlations(lam, ell, strategy="direct")
        mitm = find_semi_correlations(lam, ell, strategy="meet-in-the-middle")
        assert direct.nontrivial_tuples == mitm.nontrivial_tuples
        assert mitm.strategy == "meet-in-the-middle"

    def test_budget_exceeded(self):
        with pytest.raises(BudgetExceededError) as excinfo:
            find_semi_correlations(25, 2, budget=100)
        assert excinfo.value.estimated_cost == 12**4
        assert excinfo.value.budget == 100

    def test_auto_strategy_is_direct_for_small_searches(self):
        report = find_semi_correlations(25, 2)
        assert report.strategy == "direct"
        assert report.raw_candidates == 12**4

    def test_direct_is_overridden_above_threshold(self, caplog):
        with caplog.at_level(logging.WARNING, logger="nodal_lab"):
            chosen = _pick_strategy(MITM_THRESHOLD + 1, "direct", DEFAULT_BUDGET)
        assert chosen == "meet-in-the-middle"
        assert "direct-search limit" in caplog.text
        assert _pick_strategy(MITM_THRESHOLD, "direct", DEFAULT_BUDGET) == "direct"
        assert _pick_strategy(MITM_THRESHOLD + 1, "auto", DEFAULT_BUDGET) == "meet-in-the-middle"


class TestQuasiCorrelations:
    """Tests for the smallest nonzero sum."""

    def test_coordinate_minimum(self):
        for strategy in ("direct", "meet-in-the-middle"):
            report = min_quasi_correlation(25, 1, Axis.FIRST, strategy=strategy)
            assert report.min_nonzero_abs == pytest.approx(1.0)

    def test_vector_minimum(self):
        for strategy in ("direct", "meet-in-the-middle"):
            report = min_quasi_correlation(25, 1, Axis.FULL, strategy=strategy)
            assert report.min_nonzero_abs == pytest.approx(math.sqrt(2.0))

    def test_ratio_to_bound(self):
        report = min_quasi_correlation(25, 1, Axis.FIRST, delta=0.25)
        assert report.ratio_to_bound == pytest.approx(1.0 / 25 ** (-0.25))

    def test_strategies_agree_on_larger_circle(self):
        a = min_quasi_correlation(1105, 2, Axis.SECOND, strategy="direct")
        b = min_quasi_correlation(1105, 2, Axis.SECOND, strategy="meet-in-the-middle")
        assert a.min_nonzero_abs == pytest.approx(b.min_nonzero_abs)


class TestLambdaP:
    """Tests for Lambda(p) admissibility and difference sets."""

    def test_symmetric_pairs_are_admissible(self):
        assert is_lambda_p_admissible([1, -1, 2, -2], 4)

    def test_three_to_one_is_not_admissible(self):
        # 1 + 1 + 1 - 3 = 0
        assert not is_lambda_p_admissible([1, -1, 3, -3], 4)

    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_rejects_bad_p(self, p: int):
        with pytest.raises(InvalidInputError):
            is_lambda_p_admissible([1, -1], p)

    def test_empty_set_is_admissible(self):
        assert is_lambda_p_admissible([], 4)

    def test_difference_set(self):
        assert difference_set([0, 1, 3]) == [-3, -2, -1, 1, 2, 3]

    def test_difference_multiplicity(self):
        assert difference_multiplicity([0, 1, 2]) == 2
        assert difference_multiplicity([0, 1, 3]) == 1
        assert difference_multiplicity([7]) == 0


class TestScan:
    """Tests for the admissibility scan."""

    def test_flags(self):
        report = scan_admissible_eigenvalues(25, 2)
        flags = {e.lambda_: e.has_nontrivial_semi_correlation for e in report.entries}
        assert flags[5] is False
        assert flags[25] is True
        assert not report.truncated
        assert [e.lambda_ for e in report.entries] == [
            n for n in range(1, 26) if is_sum_of_two_squares(n)
        ]

    def test_running_density(self):
        report = scan_admissible_eigenvalues(50, 2)
        flagged = sum(e.has_nontrivial_semi_correlation for e in report.entries)
        assert report.entries[-1].running_density == pytest.approx(
            flagged / len(report.entries)
        )

    def test_truncates_on_budget(self):
        report = scan_admissible_eigenvalues(10, 2, budget=4**4)
        assert report.truncated
        assert [e.lambda_ for e in report.entries] == [1, 2, 4]

    def test_empty_range(self):
        report = scan_admissible_eigenvalues(0, 2)
        assert report.entries == []
        assert not report.truncated

    def test_workers_do_not_change_results(self):
        serial = scan_admissible_eigenvalues(60, 2)
        parallel = scan_admissible_eigenvalues(60, 2, workers=2)
        assert serial == parallel
