# Tests for core domain types and the order-statistic kernel
# Validates parameter checks, k-th maximum, power means and model parsing

import logging
import math

import numpy as np
import pytest

from utils.core import (
    Direction,
    EstimateReport,
    ModelSpec,
    ModelVariant,
    SampleSet,
    kth_max,
    orderstat_power_mean,
    support_power_means,
    validate_params,
)
from utils.errors import (
    DimensionMismatch,
    EllOutOfRange,
    EmptyInput,
    InvalidModel,
    InvalidParams,
    KBodyError,
    KOutOfRange,
    NonFiniteQ,
    NonIntegerEll,
    NonPositiveDimension,
    NonPositiveSampleCount,
    NotUnitVector,
    OutOfRange,
    QBelowOne,
)


class TestValidateParams:
    """Test validate_params."""

    def test_accepts_in_range(self):
        """Test that an in-range quadruple is accepted unchanged."""
        params = validate_params(4, 10, 3, 2)

        assert (params.n, params.N, params.ell, params.q) == (4, 10, 3, 2.0)
        assert params.degenerate is False

    def test_ell_above_n_points(self):
        """Test that ell > N is rejected."""
        with pytest.raises(EllOutOfRange):
            validate_params(4, 10, 11, 2)

    def test_q_below_one(self):
        """Test that q < 1 is rejected."""
        with pytest.raises(QBelowOne):
            validate_params(4, 10, 1, 0.5)

    def test_non_integer_ell(self):
        """Test that a fractional ell is rejected."""
        with pytest.raises(NonIntegerEll):
            validate_params(4, 10, 2.5, 2)

    def test_infinite_q(self):
        """Test that q = inf is rejected."""
        with pytest.raises(NonFiniteQ):
            validate_params(4, 10, 1, math.inf)

    def test_non_positive_sizes(self):
        """Test that n and N must be positive."""
        with pytest.raises(NonPositiveDimension):
            validate_params(0, 10, 1, 1)
        with pytest.raises(NonPositiveSampleCount):
            validate_params(4, 0, 1, 1)

    def test_integral_floats_accepted(self):
        """Test that 3.0 is accepted where an integer is expected."""
        params = validate_params(4.0, 10.0, 3.0, 2)

        assert params.ell == 3
        assert isinstance(params.N, int)

    def test_degenerate_instance_warns(self, caplog):
        """Test that N < n is accepted with a warning."""
        with caplog.at_level(logging.WARNING, logger="utils.core"):
            params = validate_params(10, 3, 1, 1)

        assert params.degenerate is True
        assert "Degenerate" in caplog.text

    def test_errors_are_value_errors(self):
        """Test that parameter errors can be caught as ValueError and KBodyError."""
        assert issubclass(EllOutOfRange, InvalidParams)
        assert issubclass(EllOutOfRange, ValueError)
        assert issubclass(EllOutOfRange, KBodyError)


class TestKthMax:
    """Test kth_max."""

    def test_maximum_and_minimum(self):
        """Test k = 1 and k = len(values)."""
        assert kth_max([3, 1, 2], 1) == 3
        assert kth_max([3, 1, 2], 3) == 1

    def test_ties_counted(self):
        """Test that ties are kept with multiplicity."""
        assert kth_max([5, 5, 2], 2) == 5

    def test_k_out_of_range(self):
        """Test that k outside [1, len] is rejected."""
        with pytest.raises(KOutOfRange):
            kth_max([3, 1, 2], 0)
        with pytest.raises(KOutOfRange):
            kth_max([3, 1, 2], 4)
        with pytest.raises(KOutOfRange):
            kth_max([3, 1, 2], 1.5)


class TestOrderstatPowerMean:
    """Test orderstat_power_mean and support_power_means."""

    def test_hand_evaluated_values(self):
        """Test small hand-checked cases."""
        assert orderstat_power_mean([1, 0], 1, 1) == 1.0
        assert orderstat_power_mean([1, 1], 2, 2) == pytest.approx(1.0, rel=1e-15)
        assert orderstat_power_mean([3, 4], 2, 2) == pytest.approx(math.sqrt(12.5), rel=1e-14)

    def test_uses_absolute_values(self):
        """Test that signs are ignored."""
        assert orderstat_power_mean([-3, 2, -1], 1, 1) == 3.0

    def test_ell_equals_n_is_normalized_q_norm(self, rng):
        """Test the ell = N identity against numpy's q-norm."""
        values = rng.standard_normal(50)
        for q in (1.0, 2.0, 3.5):
            expected = 50 ** (-1.0 / q) * np.linalg.norm(values, ord=q)
            assert orderstat_power_mean(values, 50, q) == pytest.approx(expected, rel=1e-12)

    def test_large_q_does_not_overflow(self):
        """Test that huge values with large q stay finite."""
        assert orderstat_power_mean([1e200, 1e200, 1.0], 2, 8.0) == pytest.approx(1e200, rel=1e-14)

    def test_zero_vector(self):
        """Test that a zero input gives 0."""
        assert orderstat_power_mean([0.0, 0.0, 0.0], 2, 3.0) == 0.0

    def test_empty_input(self):
        """Test that an empty input raises EmptyInput."""
        with pytest.raises(EmptyInput):
            orderstat_power_mean([], 1, 1)

    def test_columns_match_sorted_reference(self, rng):
        """Test partition and sort paths against a direct sort."""
        matrix = rng.standard_normal((40, 6))
        for ell in (1, 3, 10, 25, 40):
            result = support_power_means(matrix, ell, 2.5)
            top = -np.sort(-np.abs(matrix), axis=0)[:ell]
            expected = np.mean(top ** 2.5, axis=0) ** (1 / 2.5)
            np.testing.assert_allclose(result, expected, rtol=1e-12)


class TestModelSpec:
    """Test ModelSpec parsing and validation."""

    def test_parse_and_label(self):
        """Test the short text form."""
        assert ModelSpec.parse("gaussian").label == "GaussianStandard"
        assert ModelSpec.parse("cone:1.5").label == "ConeLp(p=1.5)"
        assert ModelSpec.parse("ball:2").variant is ModelVariant.UNIFORM_BALL_LP
        assert ModelSpec.parse("isoball:1").label == "IsotropicUniformBallLp(p=1)"

    def test_parse_errors(self):
        """Test unknown variants and missing exponents."""
        with pytest.raises(InvalidModel):
            ModelSpec.parse("cauchy")
        with pytest.raises(InvalidModel):
            ModelSpec.parse("cone")
        with pytest.raises(InvalidModel):
            ModelSpec.parse("ball:abc")

    def test_exponent_range(self):
        """Test that p < 1 and infinite p are rejected."""
        with pytest.raises(InvalidModel):
            ModelSpec.cone_lp(0.5)
        with pytest.raises(InvalidModel):
            ModelSpec.uniform_ball_lp(math.inf)

    def test_gaussian_ignores_exponent(self):
        """Test that the Gaussian model carries no exponent."""
        assert ModelSpec(ModelVariant.GAUSSIAN, p=3.0).p is None

    def test_scale(self):
        """Test scale validation and with_scale."""
        with pytest.raises(InvalidModel):
            ModelSpec.gaussian(scale=-1.0)
        assert ModelSpec.cone_lp(2).with_scale(0.5).scale == 0.5

    def test_isotropic_flag(self):
        """Test which laws count as isotropic."""
        assert ModelSpec.gaussian().is_isotropic
        assert ModelSpec.isotropic_ball_lp(1).is_isotropic
        assert not ModelSpec.cone_lp(2).is_isotropic
        assert not ModelSpec.uniform_ball_lp(2).is_isotropic


class TestDirectionAndSamples:
    """Test Direction, SampleSet and EstimateReport validation."""

    def test_direction_requires_unit_norm(self):
        """Test that non-unit vectors are rejected."""
        with pytest.raises(NotUnitVector):
            Direction(np.array([1.0, 1.0]))
        with pytest.raises(NotUnitVector):
            Direction.from_vector([0.0, 0.0])

    def test_direction_helpers(self):
        """Test basis and from_vector."""
        assert Direction.basis(3, 1).coords.tolist() == [0.0, 1.0, 0.0]
        np.testing.assert_allclose(Direction.from_vector([3.0, 4.0]).coords, [0.6, 0.8])

    def test_sample_set_shape(self):
        """Test that SampleSet needs a non-empty finite matrix."""
        with pytest.raises(DimensionMismatch):
            SampleSet(np.zeros(3), ModelSpec.gaussian())
        with pytest.raises(OutOfRange):
            SampleSet(np.array([[np.nan, 0.0]]), ModelSpec.gaussian())

    def test_marginals(self, unit_samples):
        """Test inner products and dimension checks."""
        np.testing.assert_array_equal(unit_samples.marginals([1.0, 0.0]), [1.0, 0.0])
        with pytest.raises(DimensionMismatch):
            unit_samples.marginals([1.0, 0.0, 0.0])

    def test_scaled_sample_set(self, unit_samples):
        """Test scaling the vectors and the model."""
        scaled = unit_samples.scaled(3.0)

        assert scaled.vectors[0, 0] == 3.0
        assert scaled.model.scale == 3.0

    def test_estimate_report_validation(self):
        """Test that a negative standard error is rejected."""
        params = validate_params(2, 2, 1, 1)
        with pytest.raises(OutOfRange):
            EstimateReport(1.0, -0.1, 10, 0, params, ModelSpec.gaussian(), 1)

        report = EstimateReport(1.0, 0.1, 10, 4, params, ModelSpec.gaussian(), 1)
        assert report.to_dict()["model"] == "GaussianStandard"
