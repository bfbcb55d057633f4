"""Tests for exact and Monte Carlo error evaluation."""

from math import comb

import numpy as np
import pytest

from gthyp.core import CompRule, SizeDistribution, TestMatrix, WeightRule
from gthyp.ensemble import EnsembleSpec, derive_seed, sample_matrix
from gthyp.errors import InputError, ResourceError
from gthyp.evaluator import (
    ErrorPair,
    evaluate,
    evaluation_record,
    exact_comp_error,
    exact_wdr_counts,
    general_error,
    mc_error,
    sum_lower_bound,
    universal_error_wdr,
    weight_histogram,
)
from gthyp.exponent import lower_bound_error


@pytest.fixture
def small():
    """Columns 110, 011, 101, 111."""
    return TestMatrix.from_columns(["110", "011", "101", "111"])


def zero_design(n: int, t: int) -> TestMatrix:
    return TestMatrix(np.zeros((n, t), dtype=np.uint8))


class TestExactWdr:
    def test_zero_columns(self):
        counts = exact_wdr_counts(zero_design(4, 6), 2, 0)
        assert counts.b1_s == 0
        assert counts.b2_s1 == comb(6, 3)
        assert universal_error_wdr(zero_design(4, 6), 2, 0).eps == 1.0

    def test_all_ones_columns(self):
        X = TestMatrix(np.ones((5, 6), dtype=np.uint8))
        counts = exact_wdr_counts(X, 1, 4)
        assert counts.b1_s == 6
        assert counts.b2_s1 == 0

    def test_identity(self):
        errors = universal_error_wdr(TestMatrix.identity(5), 2, 2)
        assert errors == ErrorPair(0.0, 0.0)

    def test_small_matrix(self, small):
        # every pair ORs to weight 3, every triple too
        counts = exact_wdr_counts(small, 2, 2)
        assert counts.b1_s == 6
        assert counts.b2_s1 == 0

    def test_histogram_totals(self, small):
        hist = weight_histogram(small, 2)
        assert hist.sum() == comb(4, 2)

    def test_threshold_range(self, small):
        with pytest.raises(InputError):
            exact_wdr_counts(small, 2, 4)

    def test_cap(self):
        with pytest.raises(ResourceError, match="Monte Carlo"):
            exact_wdr_counts(TestMatrix.identity(40), 2, 2, cap=100)

    def test_threads_do_not_change_counts(self):
        X = sample_matrix(EnsembleSpec(10, 40, 2), 5)
        assert exact_wdr_counts(X, 2, 3, threads=1) == exact_wdr_counts(X, 2, 3, threads=4)

    def test_set_size_monotonicity(self):
        X = sample_matrix(EnsembleSpec(8, 12, 2), 9)
        t = X.n_items
        for T in range(X.n_tests + 1):
            hists = {k: weight_histogram(X, k) for k in (1, 2, 3, 4)}
            for k in (1, 2, 3):
                above_k = int(hists[k][T + 1:].sum())
                above_k1 = int(hists[k + 1][T + 1:].sum())
                below_k = int(hists[k][:T + 1].sum())
                below_k1 = int(hists[k + 1][:T + 1].sum())
                assert above_k1 * (k + 1) >= above_k * (t - k)
                assert below_k * (t - k) >= below_k1 * (k + 1)

    def test_above_converse_bound(self):
        for seed in range(5):
            X = sample_matrix(EnsembleSpec(5, 15, 2), seed)
            bound = lower_bound_error(5, 15, 2)
            best = min(universal_error_wdr(X, 2, T).eps for T in range(6))
            assert best >= bound


class TestExactComp:
    def test_disjunctive_design_is_error_free(self):
        assert exact_comp_error(TestMatrix.identity(6), 2) == ErrorPair(0.0, 0.0)

    def test_identity_up_to_s6(self):
        X = TestMatrix.identity(8)
        for s in range(1, 7):
            assert exact_comp_error(X, s) == ErrorPair(0.0, 0.0)

    def test_repeated_columns(self):
        X = TestMatrix.from_columns(["10", "10"])
        assert exact_comp_error(X, 1).err_h0 == 1.0

    def test_small_matrix(self, small):
        assert exact_comp_error(small, 2) == ErrorPair(1.0, 0.0)

    def test_h1_error_is_zero(self):
        X = sample_matrix(EnsembleSpec(6, 10, 2), 1)
        assert exact_comp_error(X, 2).err_h1 == 0.0


class TestGeneralError:
    def test_worst_case_matches_universal(self):
        X = sample_matrix(EnsembleSpec(10, 15, 2), 42)
        p = SizeDistribution.worst_case(2, 15)
        for T in (1, 2, 3, 4):
            assert general_error(X, WeightRule(T), p, 2) == universal_error_wdr(X, 2, T)

    def test_point_mass_on_s(self, small):
        p = SizeDistribution.point(2, 4)
        errors = general_error(small, WeightRule(2), p, 2)
        assert errors.err_h0 == universal_error_wdr(small, 2, 2).err_h0
        assert errors.err_h1 == 0.0

    def test_empty_set_only(self, small):
        errors = general_error(small, WeightRule(0), SizeDistribution.point(0, 4), 2)
        assert errors == ErrorPair(0.0, 0.0)

    def test_constant_in_mixture_weights(self):
        X = sample_matrix(EnsembleSpec(8, 10, 2), 3)
        a = general_error(X, WeightRule(3), SizeDistribution((0, 0, 0.3, 0.7)), 2)
        b = general_error(X, WeightRule(3), SizeDistribution((0, 0, 0.8, 0.2)), 2)
        assert a == b

    def test_comp_matches_exact(self):
        X = sample_matrix(EnsembleSpec(6, 9, 2), 4)
        p = SizeDistribution.worst_case(2, 9)
        assert general_error(X, CompRule(2), p, 2) == exact_comp_error(X, 2)

    def test_comp_budget_counts_column_checks(self, small):
        p = SizeDistribution.worst_case(2, 4)
        general_error(small, WeightRule(1), p, 2, cap=10)
        with pytest.raises(ResourceError):
            general_error(small, CompRule(2), p, 2, cap=39)
        general_error(small, CompRule(2), p, 2, cap=40)

    def test_mass_beyond_t(self, small):
        with pytest.raises(InputError):
            general_error(small, WeightRule(1), SizeDistribution.point(5, 5), 2)


class TestMonteCarlo:
    def test_zero_columns(self):
        estimate = mc_error(zero_design(5, 8), WeightRule(0), 2, trials=300, seed=1)
        assert estimate.point == ErrorPair(0.0, 1.0)
        assert estimate.half_width == (0.0, 0.0)
        assert estimate.contains(ErrorPair(0.0, 1.0))
        assert not estimate.contains(ErrorPair(0.0, 0.9))

    def test_deterministic(self):
        X = sample_matrix(EnsembleSpec(10, 20, 2), 8)
        a = mc_error(X, WeightRule(3), 2, trials=2500, seed=77)
        b = mc_error(X, WeightRule(3), 2, trials=2500, seed=77, threads=3)
        assert a == b

    def test_agrees_with_exact(self):
        inside = 0
        for i in range(20):
            t = 10 + i % 11
            X = sample_matrix(EnsembleSpec(10, t, 2), derive_seed(2024, i))
            exact = universal_error_wdr(X, 2, 3)
            estimate = mc_error(X, WeightRule(3), 2, trials=10_000, seed=derive_seed(2024, i, 1))
            inside += abs(estimate.point.err_h0 - exact.err_h0) <= estimate.half_width[0]
            inside += abs(estimate.point.err_h1 - exact.err_h1) <= estimate.half_width[1]
        assert inside >= 34

    def test_comp_rule(self):
        X = sample_matrix(EnsembleSpec(8, 12, 3), 6)
        estimate = mc_error(X, CompRule(2), 2, trials=4000, seed=3)
        exact = exact_comp_error(X, 2)
        assert abs(estimate.point.err_h0 - exact.err_h0) <= max(4 * estimate.half_width[0], 0.02)

    def test_trials_must_be_positive(self, small):
        with pytest.raises(InputError):
            mc_error(small, WeightRule(1), 2, trials=0, seed=1)


class TestSumLowerBound:
    def test_below_every_rule(self):
        X = sample_matrix(EnsembleSpec(5, 12, 2), 10)
        floor = sum_lower_bound(X, 2)
        for T in range(6):
            assert universal_error_wdr(X, 2, T).eps >= floor - 1e-12
        assert exact_comp_error(X, 2).eps >= floor - 1e-12

    def test_identity_separates(self):
        assert sum_lower_bound(TestMatrix.identity(6), 2) == 0.0


class TestEvaluate:
    def test_dispatch(self, small):
        assert evaluate(small, WeightRule(2), 2) == universal_error_wdr(small, 2, 2)
        assert evaluate(small, CompRule(2), 2) == exact_comp_error(small, 2)

    def test_monte_carlo_needs_seed(self, small):
        with pytest.raises(InputError):
            evaluate(small, WeightRule(2), 2, method="monte-carlo", trials=10)

    def test_record(self):
        X = sample_matrix(EnsembleSpec(10, 15, 1), 4)
        errors = evaluate(X, WeightRule(2), 2)
        row = evaluation_record(X, WeightRule(2), 2, errors, "exact").as_row()
        assert row[:6] == [10, 15, 2, "WDR", 2, 1]
        assert row[-3:] == ["exact", "", ""]
