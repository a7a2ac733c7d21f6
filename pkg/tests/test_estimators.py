"""Unit tests for the distance covariance estimators and projections."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpdcor import (
    ConfigError,
    DataError,
    EstimateRecord,
    ProjectionSet,
    dcov_via_hsic,
    hsic,
    induced_kernel,
    pairwise_distances,
    projected_dcov,
    projection_constant,
    sample_unit_projections,
    unbiased_dcorr,
    unbiased_dcov,
)
from dpdcor.oracle import oracle_dcov, oracle_hsic

RAMP_DCOV = 1.0666666666666682


def _floats_array(n, lo=-50.0, hi=50.0):
    return st.lists(
        st.floats(min_value=lo, max_value=hi, allow_nan=False, width=64),
        min_size=n,
        max_size=n,
    ).map(lambda v: np.asarray(v).reshape(-1, 1))


class TestPairwiseDistances:
    def test_univariate_literal(self):
        d = pairwise_distances(np.array([[0.0], [3.0], [4.0]]))
        assert np.array_equal(d, np.array([[0, 3, 4], [3, 0, 1], [4, 1, 0]], dtype=float))

    def test_matches_direct_norms(self):
        rng = np.random.default_rng(10)
        x = rng.standard_normal((6, 3))
        d = pairwise_distances(x)
        for i in range(6):
            for j in range(6):
                assert d[i, j] == pytest.approx(math.dist(x[i], x[j]), abs=1e-12)

    def test_symmetric_zero_diagonal(self):
        d = pairwise_distances(np.random.default_rng(11).standard_normal((8, 2)))
        assert np.array_equal(d, d.T)
        assert np.all(np.diag(d) == 0.0)

    def test_rejects_bad_input(self):
        with pytest.raises(DataError):
            pairwise_distances(np.array([[np.nan], [1.0]]))
        with pytest.raises(DataError):
            pairwise_distances(np.empty((0, 1)))


class TestUnbiasedDcov:
    def test_ramp_frozen_value(self):
        v = np.arange(5.0)
        assert unbiased_dcov(v, v) == pytest.approx(RAMP_DCOV, abs=1e-12)

    def test_matches_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            n = int(rng.integers(4, 30))
            x = rng.standard_normal((n, int(rng.integers(1, 4))))
            y = rng.standard_normal((n, int(rng.integers(1, 4))))
            assert unbiased_dcov(x, y) == pytest.approx(oracle_dcov(x, y), abs=1e-12)

    def test_constant_column_gives_zero(self):
        y = np.random.default_rng(13).standard_normal(7)
        assert unbiased_dcov(np.ones(7), y) == 0.0

    def test_accepts_1d_and_2d_forms(self):
        x = np.arange(6.0)
        assert unbiased_dcov(x, x) == unbiased_dcov(x.reshape(-1, 1), x.reshape(-1, 1))

    def test_rejects_short_or_mismatched(self):
        with pytest.raises(DataError):
            unbiased_dcov(np.arange(3.0), np.arange(3.0))
        with pytest.raises(DataError):
            unbiased_dcov(np.arange(5.0), np.arange(6.0))

    @settings(max_examples=40, deadline=None)
    @given(_floats_array(8), _floats_array(8), st.randoms(use_true_random=False))
    def test_joint_permutation_invariance(self, x, y, rnd):
        perm = list(range(8))
        rnd.shuffle(perm)
        base = unbiased_dcov(x, y)
        assert unbiased_dcov(x[perm], y[perm]) == pytest.approx(base, abs=1e-8 + 1e-8 * abs(base))

    def test_self_dcov_nonnegative_many_draws(self):
        # the unbiased statistic can dip below zero for cross terms but
        # stays >= 0 when both arguments coincide
        rng = np.random.default_rng(14)
        for _ in range(1000):
            n = int(rng.integers(4, 16))
            x = rng.standard_normal((n, int(rng.integers(1, 3))))
            assert unbiased_dcov(x, x) >= 0.0


class TestUnbiasedDcorr:
    def test_identical_arguments_give_one(self):
        x = np.random.default_rng(15).standard_normal((20, 2))
        assert unbiased_dcorr(x, x) == pytest.approx(1.0, abs=1e-12)

    def test_constant_argument_guard(self):
        y = np.random.default_rng(16).standard_normal(9)
        assert unbiased_dcorr(np.ones(9), y) == 0.0

    def test_magnitude_at_most_one(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            n = int(rng.integers(4, 25))
            x = rng.standard_normal((n, 2))
            y = rng.standard_normal((n, 1))
            assert abs(unbiased_dcorr(x, y)) <= 1.0 + 1e-12


class TestProjectionConstant:
    def test_low_dimension_closed_forms(self):
        assert projection_constant(1) == 1.0
        assert projection_constant(2) == pytest.approx(math.pi / 2.0, rel=1e-14)
        assert projection_constant(3) == pytest.approx(2.0, rel=1e-14)
        # p = 10: sqrt(pi) Gamma(5.5) / Gamma(5)
        assert projection_constant(10) == pytest.approx(315.0 * math.pi / 256.0, rel=1e-12)

    def test_large_p_asymptotics(self):
        # c_p ~ sqrt(pi p / 2) for large p
        for p in (500, 10_000):
            ratio = projection_constant(p) / math.sqrt(math.pi * p / 2.0)
            assert ratio == pytest.approx(1.0, abs=1e-3)

    def test_smooth_across_evaluation_regimes(self):
        ratio = projection_constant(301) / projection_constant(300)
        assert 1.0 < ratio < 1.01

    def test_rejects_bad_dimension(self):
        for bad in (0, -1, 2.5):
            with pytest.raises(ConfigError):
                projection_constant(bad)


class TestProjectionSampling:
    def test_unit_norms(self):
        ps = sample_unit_projections(4, 50, seed=18)
        norms = np.linalg.norm(ps.directions, axis=1)
        assert np.allclose(norms, 1.0, atol=1e-12)
        assert ps.k == 50 and ps.dim == 4

    def test_univariate_directions_are_signs(self):
        ps = sample_unit_projections(1, 40, seed=19)
        assert set(np.unique(ps.directions)) <= {-1.0, 1.0}

    def test_deterministic_in_seed(self):
        a = sample_unit_projections(3, 10, seed=20)
        b = sample_unit_projections(3, 10, seed=20)
        c = sample_unit_projections(3, 10, seed=21)
        assert np.array_equal(a.directions, b.directions)
        assert not np.array_equal(a.directions, c.directions)

    def test_mean_direction_near_zero(self):
        ps = sample_unit_projections(3, 4000, seed=22)
        assert np.all(np.abs(ps.directions.mean(axis=0)) < 0.05)

    def test_projection_set_validation(self):
        with pytest.raises(ConfigError):
            ProjectionSet(np.array([[1.0, 1.0]]))  # not unit norm
        with pytest.raises(ConfigError):
            ProjectionSet(np.array([1.0, 0.0]))  # not 2-d
        with pytest.raises(ConfigError):
            sample_unit_projections(0, 5, seed=0)
        with pytest.raises(ConfigError):
            sample_unit_projections(2, 0, seed=0)


class TestProjectedDcov:
    def test_univariate_collapse(self):
        rng = np.random.default_rng(23)
        x = rng.standard_normal(24)
        y = rng.standard_normal(24)
        base = unbiased_dcov(x, y)
        for k in (1, 5, 50):
            rec = projected_dcov(x, y, sample_unit_projections(1, k, seed=k), sample_unit_projections(1, k, seed=k + 1))
            assert abs(rec.value - base) <= 1e-12

    def test_record_fields(self):
        rng = np.random.default_rng(24)
        x = rng.standard_normal((12, 2))
        y = rng.standard_normal((12, 3))
        rec = projected_dcov(x, y, sample_unit_projections(2, 7, seed=1), sample_unit_projections(3, 7, seed=2))
        assert isinstance(rec, EstimateRecord)
        assert rec.kind == "projected" and rec.k == 7 and rec.budget is None
        d = rec.as_dict()
        assert d["kind"] == "projected" and d["value"] == rec.value

    def test_many_projections_approach_full_statistic(self):
        rng = np.random.default_rng(31)
        x = rng.standard_normal((100, 3))
        y = x @ rng.standard_normal((3, 3)) * 0.7 + 0.3 * rng.standard_normal((100, 3))
        full = unbiased_dcov(x, y)
        rec = projected_dcov(x, y, sample_unit_projections(3, 5000, seed=77), sample_unit_projections(3, 5000, seed=78))
        assert rec.value == pytest.approx(full, rel=0.05)

    def test_rejects_mismatched_projections(self):
        rng = np.random.default_rng(25)
        x = rng.standard_normal((10, 2))
        y = rng.standard_normal((10, 2))
        with pytest.raises(ConfigError):
            projected_dcov(x, y, sample_unit_projections(2, 3, seed=1), sample_unit_projections(2, 4, seed=2))
        with pytest.raises(ConfigError):
            projected_dcov(x, y, sample_unit_projections(3, 3, seed=1), sample_unit_projections(2, 3, seed=2))


class TestEstimateRecord:
    def test_kind_and_budget_consistency(self):
        with pytest.raises(ConfigError):
            EstimateRecord(value=0.1, kind="made-up")
        with pytest.raises(ConfigError):
            EstimateRecord(value=0.1, kind="private-dvar")  # private needs a budget
        with pytest.raises(ConfigError):
            EstimateRecord(value=0.1, kind="unbiased", budget=(1.0, 0.0))
        with pytest.raises(ConfigError):
            EstimateRecord(value=0.1, kind="private-dvar", budget=(-1.0, 0.0))
        rec = EstimateRecord(value=0.1, kind="private-dvar", budget=(1.0, 0.0))
        assert rec.as_dict()["budget"] == [1.0, 0.0]


class TestInducedKernel:
    def test_two_point_literals(self):
        d = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert np.array_equal(induced_kernel(d, mode="max-subtract"), np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert np.array_equal(induced_kernel(d, mode="max-normalize"), np.array([[1.0, 0.0], [0.0, 1.0]]))

    def test_subtract_mode_preserves_differences(self):
        d = pairwise_distances(np.random.default_rng(26).standard_normal((9, 2)))
        k = induced_kernel(d, mode="max-subtract")
        m = d.max()
        # k(i,i) = m and (k_ii + k_jj)/2 - k_ij recovers d_ij
        assert np.allclose((np.diag(k)[:, None] + np.diag(k)[None, :]) / 2.0 - k, d, atol=1e-12)

    def test_validation(self):
        with pytest.raises(DataError):
            induced_kernel(np.zeros((2, 3)))
        with pytest.raises(DataError):
            induced_kernel(np.array([[0.0, 1.0], [2.0, 0.0]]))
        with pytest.raises(DataError):
            induced_kernel(np.array([[0.5, 1.0], [1.0, 0.0]]))
        with pytest.raises(DataError):
            induced_kernel(np.zeros((3, 3)), mode="max-normalize")  # degenerate scale
        with pytest.raises(ConfigError):
            induced_kernel(np.array([[0.0, 1.0], [1.0, 0.0]]), mode="other")


class TestHsic:
    def test_two_point_identity(self):
        assert hsic(np.eye(2), np.eye(2)) == 1.0

    def test_constant_kernel_is_zero(self):
        l = np.random.default_rng(27).standard_normal((6, 6))
        l = (l + l.T) / 2.0
        assert hsic(np.full((6, 6), 2.0), l) == pytest.approx(0.0, abs=1e-12)

    def test_matches_oracle(self):
        rng = np.random.default_rng(28)
        for m in (5, 10, 17):
            a = rng.standard_normal((m, m))
            b = rng.standard_normal((m, m))
            k, l = (a + a.T) / 2.0, (b + b.T) / 2.0
            assert hsic(k, l) == pytest.approx(oracle_hsic(k, l), abs=1e-10)

    def test_validation(self):
        with pytest.raises(DataError):
            hsic(np.eye(3), np.eye(4))
        with pytest.raises(DataError):
            hsic(np.array([[0.0, 1.0], [2.0, 0.0]]), np.eye(2))
        with pytest.raises(DataError):
            hsic(np.eye(1), np.eye(1))


class TestDcovViaHsic:
    def test_record_kind(self):
        rng = np.random.default_rng(29)
        rec = dcov_via_hsic(rng.standard_normal(10), rng.standard_normal(10))
        assert rec.kind == "hsic-equivalent" and rec.budget is None

    def test_constant_input_gives_zero(self):
        y = np.random.default_rng(30).standard_normal(8)
        assert dcov_via_hsic(np.ones(8), y).value == 0.0

    def test_gap_to_unbiased_shrinks_with_n(self):
        # the kernel route matches the plain statistic up to O(1/n) terms
        from dpdcor.datasets import minmax_columns, synth_dataset

        gaps = []
        for n in (20, 40, 80):
            ds = synth_dataset("linear", n, noise_sd=0.3, seed=11)
            x = minmax_columns(ds.values[:, :1])
            y = minmax_columns(ds.values[:, 1:])
            gaps.append(abs(dcov_via_hsic(x, y).value - unbiased_dcov(x, y)))
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 2e-3
