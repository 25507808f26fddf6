# Tests for support functions and Monte Carlo estimators
# Validates hand-evaluated support values, pathwise properties and estimator oracles

import math

import numpy as np
import pytest

from utils.core import Direction, ModelSpec, SampleSet, validate_params
from utils.errors import (
    DeltaOutOfRange,
    DimensionMismatch,
    DivisionByZero,
    InsufficientSamples,
    InvalidModel,
    OutOfRange,
)
from utils.geometry import (
    Estimator,
    MeanWidthConfig,
    centroid_support_estimate,
    centroid_width_estimate,
    comparison_ratio,
    expected_comparison_ratio,
    floating_support_estimate,
    gaussian_orderstat_moment_estimate,
    max_moment_estimate,
    max_norm_estimate,
    mean_width_estimate,
    reference_body_width_estimate,
    support_expectation_estimate,
    support_function,
    support_value,
)

HALF_NORMAL_MEAN = math.sqrt(2 / math.pi)


class TestSupportValue:
    """Test support_value on fixed realizations."""

    def test_hand_evaluated(self, unit_samples):
        """Test the two-point examples in the plane."""
        assert support_value(unit_samples, [1.0, 0.0], 1, 1) == 1.0
        assert support_value(unit_samples, [1.0, 0.0], 2, 2) == pytest.approx(1 / math.sqrt(2), rel=1e-15)

    def test_accepts_direction(self, unit_samples):
        """Test that a Direction and a plain list agree."""
        theta = Direction.from_vector([1.0, 1.0])

        assert support_value(unit_samples, theta, 1, 1) == support_value(unit_samples, theta.coords, 1, 1)

    def test_ell_equals_n(self, gaussian_samples):
        """Test the ell = N identity against a direct q-norm."""
        theta = Direction.basis(8, 2)
        marginals = gaussian_samples.marginals(theta.coords)
        for q in (1.0, 2.0, 5.0):
            expected = 200 ** (-1 / q) * np.sum(np.abs(marginals) ** q) ** (1 / q)
            assert support_value(gaussian_samples, theta, 200, q) == pytest.approx(expected, rel=1e-12)

    def test_dimension_mismatch(self, unit_samples):
        """Test that theta must match the sample dimension."""
        with pytest.raises(DimensionMismatch):
            support_value(unit_samples, [1.0, 0.0, 0.0], 1, 1)

    def test_pathwise_monotone(self, gaussian_samples):
        """Test nondecreasing in q and nonincreasing in ell on one realization."""
        theta = Direction.from_vector(np.arange(1.0, 9.0))
        in_q = [support_value(gaussian_samples, theta, 5, q) for q in (1, 1.5, 2, 4, 8)]
        in_ell = [support_value(gaussian_samples, theta, ell, 2) for ell in (1, 2, 10, 50, 200)]

        assert all(b >= a * (1 - 1e-15) for a, b in zip(in_q, in_q[1:]))
        assert all(b <= a * (1 + 1e-15) for a, b in zip(in_ell, in_ell[1:]))

    def test_sandwich(self, gaussian_samples):
        """Test e^{-1} h(1,1) <= h(ell, q) <= h(1,1) when q >= log ell."""
        theta = Direction.basis(8, 0)
        top = support_value(gaussian_samples, theta, 1, 1)
        for ell, q in ((10, 3.0), (50, 4.0), (200, 6.0)):
            value = support_value(gaussian_samples, theta, ell, q)
            assert top / math.e <= value <= top

    def test_homogeneity(self, gaussian_samples):
        """Test that scaling the samples scales the support value."""
        theta = Direction.basis(8, 1)
        base = support_value(gaussian_samples, theta, 3, 2.5)

        assert support_value(gaussian_samples.scaled(2.5), theta, 3, 2.5) == pytest.approx(2.5 * base, rel=1e-14)

    def test_subadditive(self, gaussian_samples, rng):
        """Test h(x + y) <= h(x) + h(y) for the homogeneous extension."""
        for _ in range(20):
            x, y = rng.standard_normal(8), rng.standard_normal(8)
            lhs = support_function(gaussian_samples, x + y, 7, 3.0)
            rhs = support_function(gaussian_samples, x, 7, 3.0) + support_function(gaussian_samples, y, 7, 3.0)
            assert lhs <= rhs * (1 + 1e-12)


class TestComparisonRatio:
    """Test comparison_ratio and its expected counterpart."""

    def test_identical_inputs(self, gaussian_samples):
        """Test that identical samples and params give 1."""
        params = validate_params(8, 200, 4, 2)

        assert comparison_ratio(gaussian_samples, gaussian_samples, Direction.basis(8), params, params) == 1.0

    def test_zero_denominator(self, gaussian_samples):
        """Test DivisionByZero for the zero body."""
        params = validate_params(8, 200, 1, 1)
        zero = gaussian_samples.scaled(0.0)

        with pytest.raises(DivisionByZero):
            comparison_ratio(gaussian_samples, zero, Direction.basis(8), params, params)

    def test_mismatched_inputs(self, gaussian_samples, unit_samples):
        """Test shape and model checks."""
        params = validate_params(8, 200, 1, 1)
        other = SampleSet(gaussian_samples.vectors, ModelSpec.cone_lp(2))

        with pytest.raises(DimensionMismatch):
            comparison_ratio(gaussian_samples, unit_samples, Direction.basis(8), params, params)
        with pytest.raises(InvalidModel):
            comparison_ratio(gaussian_samples, other, Direction.basis(8), params, params)

    def test_expected_ratio_linearity(self):
        """Test E h(N, ell=N, q=1) / E h(1, 1, 1) close to 1 for Gaussian."""
        ratio = expected_comparison_ratio(
            ModelSpec.gaussian(), validate_params(3, 20, 20, 1), validate_params(3, 1, 1, 1),
            Direction.basis(3), 4000, seed=5,
        )

        assert abs(ratio.value - 1.0) < 4 * ratio.std_error
        assert ratio.numerator.value == pytest.approx(HALF_NORMAL_MEAN, abs=0.02)


class TestMeanWidth:
    """Test mean_width_estimate and support_expectation_estimate."""

    def test_law_of_large_numbers(self):
        """Test Gaussian ell=N, q=2, N=10^4 gives 1."""
        report = mean_width_estimate(
            ModelSpec.gaussian(), validate_params(4, 10**4, 10**4, 2), MeanWidthConfig(8, 20), seed=1
        )

        assert abs(report.value - 1.0) < 4 * report.std_error + 1e-4
        assert report.n_replicates == 20
        assert report.n_directions == 8

    def test_single_point(self):
        """Test Gaussian N = ell = q = 1 gives E|g|."""
        report = mean_width_estimate(
            ModelSpec.gaussian(), validate_params(3, 1, 1, 1), MeanWidthConfig(4, 2000), seed=2
        )

        assert abs(report.value - HALF_NORMAL_MEAN) < 4 * report.std_error

    def test_zero_body(self):
        """Test that scale 0 gives a zero estimate."""
        report = mean_width_estimate(
            ModelSpec.cone_lp(2, scale=0.0), validate_params(3, 1, 1, 1), MeanWidthConfig(4, 5), seed=3
        )

        assert report.value == 0.0
        assert report.std_error == 0.0

    def test_deterministic(self):
        """Test that the same seed reproduces the estimate."""
        params = validate_params(5, 30, 3, 2)
        cfg = MeanWidthConfig(6, 10, antithetic=True)
        first = mean_width_estimate(ModelSpec.uniform_ball_lp(1.5), params, cfg, seed=4)
        second = mean_width_estimate(ModelSpec.uniform_ball_lp(1.5), params, cfg, seed=4)

        assert first.value == second.value
        assert first.std_error == second.std_error

    def test_bit_exact_across_threads(self):
        """Test identical results for 1 and 4 workers in bit-exact mode."""
        params = validate_params(6, 50, 5, 3)
        cfg = MeanWidthConfig(8, 16)
        single = mean_width_estimate(ModelSpec.cone_lp(1.5), params, cfg, 11, workers=1, bit_exact=True)
        pooled = mean_width_estimate(ModelSpec.cone_lp(1.5), params, cfg, 11, workers=4, bit_exact=True)

        assert single.value == pooled.value
        assert single.std_error == pooled.std_error

    def test_invalid_config(self):
        """Test that zero counts are rejected."""
        with pytest.raises(OutOfRange):
            MeanWidthConfig(0, 10)

    def test_support_expectation_one_dimensional_cone(self):
        """Test that the 1-D cone measure gives exactly 1."""
        report = support_expectation_estimate(
            ModelSpec.cone_lp(3), validate_params(1, 5, 2, 2), Direction.basis(1), 10, seed=6
        )

        assert report.value == pytest.approx(1.0, rel=1e-15)

    def test_support_expectation_rotation_invariant(self):
        """Test Gaussian expected support at two directions."""
        params = validate_params(5, 40, 4, 2)
        first = support_expectation_estimate(ModelSpec.gaussian(), params, Direction.basis(5, 0), 800, seed=7)
        second = support_expectation_estimate(
            ModelSpec.gaussian(), params, Direction.from_vector(np.ones(5)), 800, seed=7, grid_index=1
        )

        assert abs(first.value - second.value) < 4 * math.hypot(first.std_error, second.std_error)

    def test_estimator_matches_function(self, estimator_instance):
        """Test the Estimator wrapper against the module function."""
        params = validate_params(4, 20, 2, 2)
        cfg = MeanWidthConfig(4, 6)

        wrapped = estimator_instance.mean_width(ModelSpec.gaussian(), params, cfg, seed=8)
        direct = mean_width_estimate(ModelSpec.gaussian(), params, cfg, seed=8)

        assert wrapped.value == direct.value

    def test_estimator_logs_errors(self, caplog):
        """Test that estimator failures are logged and re-raised."""
        params = validate_params(4, 20, 2, 2)
        estimator = Estimator(workers=1)

        with pytest.raises(DimensionMismatch):
            estimator.support_expectation(ModelSpec.gaussian(), params, [1.0, 0.0], 5, seed=1)

        assert "Support expectation estimate failed" in caplog.text


class TestCentroidAndFloating:
    """Test centroid-body and floating-body estimators."""

    @pytest.mark.parametrize("q,expected", [(1.0, HALF_NORMAL_MEAN), (2.0, 1.0), (4.0, 3 ** 0.25)])
    def test_gaussian_centroid(self, q, expected):
        """Test (E|g|^q)^{1/q} for q = 1, 2, 4."""
        report = centroid_support_estimate(ModelSpec.gaussian(), 3, q, Direction.basis(3), 200_000, seed=9)

        assert abs(report.value - expected) < 4 * report.std_error

    @pytest.mark.parametrize("delta,expected", [(0.1, 1.6449), (math.exp(-2), 1.4868)])
    def test_gaussian_floating(self, delta, expected):
        """Test the (1 - delta)-quantile of |g|."""
        report = floating_support_estimate(ModelSpec.gaussian(), 3, delta, Direction.basis(3), 100_000, seed=10)

        assert abs(report.value - expected) < 4 * report.std_error + 1e-4

    def test_floating_homogeneity(self):
        """Test that scaling the model scales the quantile."""
        base = floating_support_estimate(ModelSpec.gaussian(), 2, 0.1, Direction.basis(2), 5000, seed=11)
        scaled = floating_support_estimate(
            ModelSpec.gaussian(scale=3.0), 2, 0.1, Direction.basis(2), 5000, seed=11
        )

        assert scaled.value == pytest.approx(3.0 * base.value, rel=1e-12)

    def test_floating_errors(self):
        """Test DeltaOutOfRange and InsufficientSamples."""
        with pytest.raises(DeltaOutOfRange):
            floating_support_estimate(ModelSpec.gaussian(), 2, 0.5, Direction.basis(2), 10_000, seed=1)
        with pytest.raises(DeltaOutOfRange):
            floating_support_estimate(ModelSpec.gaussian(), 2, 0.0, Direction.basis(2), 10_000, seed=1)
        with pytest.raises(InsufficientSamples):
            floating_support_estimate(ModelSpec.gaussian(), 2, 0.1, Direction.basis(2), 100, seed=1)

    def test_centroid_width(self):
        """Test that Z_2 of a Gaussian has mean width close to 1."""
        report = centroid_width_estimate(ModelSpec.gaussian(), 4, 2.0, 32, 20_000, seed=12)

        assert report.value == pytest.approx(1.0, abs=0.05)


class TestAuxiliaryEstimates:
    """Test reference-body and order-statistic helpers."""

    def test_reference_body_ell_equals_n(self):
        """Test that K_{N,2} in R^N has support 1/sqrt(N) everywhere."""
        report = reference_body_width_estimate(16, 16, 2.0, 40, seed=13)

        assert report.value == pytest.approx(0.25, rel=1e-12)
        assert report.std_error == pytest.approx(0.0, abs=1e-12)

    def test_gaussian_orderstat_moment(self):
        """Test that ell = N, q = 2 recovers E g^2 = 1."""
        report = gaussian_orderstat_moment_estimate(50, 50, 2.0, 400, seed=14)

        assert abs(report.value - 1.0) < 4 * report.std_error

    def test_max_moment_single_point(self):
        """Test that m = 1, q = 2 recovers E g^2 = 1."""
        report = max_moment_estimate(ModelSpec.gaussian(), 3, 1, 2.0, Direction.basis(3), 20_000, seed=15)

        assert abs(report.value - 1.0) < 4 * report.std_error

    def test_max_norm_on_sphere(self):
        """Test that cone measure with p = 2 has all norms 1."""
        report = max_norm_estimate(ModelSpec.cone_lp(2), 5, 10, 20, seed=16)

        assert report.value == pytest.approx(1.0, rel=1e-12)
