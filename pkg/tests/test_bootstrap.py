import numpy as np
import pytest

from survtest.config import Settings
from survtest.exceptions import DegenerateSampleError
from survtest.models.design import ContrastMatrix
from survtest.models.results import GramMatrix
from survtest.models.sample import SurvivalSample
from survtest.services.bootstrap import (
    BLOCK_SIZE,
    bootstrap_p_value,
    empirical_quantile,
    quantile_index,
    single_test,
    weight_block,
    wild_draws,
)
from survtest.services.contrasts import null_space_basis
from survtest.services.kernels import preset_kernels
from survtest.services.teststat import gram, statistic
from tests.conftest import random_sample

TWO_SAMPLE = ContrastMatrix(entries=[[1.0, -1.0]], label="two-sample")


@pytest.fixture
def small_gram(rng) -> GramMatrix:
    sample = random_sample(rng, 12, 2)
    return gram(sample, null_space_basis(TWO_SAMPLE), preset_kernels()["K2"])


class TestWeightBlock:
    def test_rademacher_values(self):
        block = weight_block(7, 0, 5, "rademacher")
        assert block.shape == (BLOCK_SIZE, 5)
        assert set(np.unique(block)) <= {-1.0, 1.0}

    def test_normal_moments(self):
        block = np.vstack([weight_block(3, b, 50, "normal") for b in range(8)])
        assert abs(block.mean()) < 0.02
        assert block.var() == pytest.approx(1.0, abs=0.03)

    def test_unknown_law(self):
        with pytest.raises(ValueError):
            weight_block(0, 0, 3, "uniform")


class TestWildDraws:
    def test_unit_weights_reproduce_statistic(self, small_gram):
        draws = wild_draws(small_gram, 4, seed=0, weights=np.ones((4, small_gram.n)))
        assert np.all(draws.values == statistic(small_gram))

    def test_zero_gram(self):
        draws = wild_draws(GramMatrix(g=np.zeros((4, 4)), n=4), 50, seed=1)
        np.testing.assert_array_equal(draws.values, 0.0)

    def test_non_negative(self, small_gram):
        assert np.all(wild_draws(small_gram, 300, seed=2).values >= 0.0)

    def test_reproducible(self, small_gram):
        first = wild_draws(small_gram, 600, seed=5)
        second = wild_draws(small_gram, 600, seed=5)
        np.testing.assert_array_equal(first.values, second.values)

    def test_independent_of_workers(self, small_gram):
        serial = wild_draws(small_gram, 700, seed=9, n_jobs=1)
        threaded = wild_draws(small_gram, 700, seed=9, n_jobs=4)
        np.testing.assert_array_equal(serial.values, threaded.values)

    def test_prefix_independent_of_reps(self, small_gram):
        short = wild_draws(small_gram, 300, seed=11)
        long = wild_draws(small_gram, 900, seed=11)
        np.testing.assert_array_equal(short.values, long.values[:300])

    def test_forced_weights_shape(self, small_gram):
        with pytest.raises(ValueError):
            wild_draws(small_gram, 3, seed=0, weights=np.ones((2, small_gram.n)))

    def test_mean_is_trace(self, small_gram):
        values = wild_draws(small_gram, 100_000, seed=4, weight_law="normal").values
        standard_error = values.std() / np.sqrt(values.size)
        assert abs(values.mean() - np.trace(small_gram.g) / small_gram.n) < 4 * standard_error


class TestEmpiricalQuantile:
    def test_median(self):
        assert empirical_quantile(np.array([4.0, 1.0, 3.0, 2.0]), 0.5) == 2.0

    def test_maximum(self):
        assert empirical_quantile(np.array([4.0, 1.0, 3.0, 2.0]), 1.0) == 4.0

    def test_minimum_clamped(self):
        assert empirical_quantile(np.array([4.0, 1.0, 3.0, 2.0]), 0.0) == 1.0

    def test_index_ignores_float_noise(self):
        assert quantile_index(0.95, 1000) == 950
        assert quantile_index(1 - 3 / 1000, 1000) == 997

    def test_level_out_of_range(self):
        with pytest.raises(ValueError):
            quantile_index(1.5, 10)


class TestPValue:
    def test_counts_ties(self):
        assert bootstrap_p_value(np.array([1.0, 2.0, 3.0, 4.0]), 3.0) == pytest.approx(3 / 5)

    def test_never_zero(self):
        assert bootstrap_p_value(np.zeros(99), 1.0) == pytest.approx(0.01)


class TestSingleTest:
    def test_zero_statistic_never_rejects(self, silent_sample):
        result = single_test(silent_sample, TWO_SAMPLE, preset_kernels()["K3"], reps=200, alpha=0.05, seed=0)
        assert result.statistic == 0.0
        assert not result.reject
        assert result.p_value == 1.0

    def test_no_events(self):
        sample = SurvivalSample(times=[1.0, 2.0], status=[0, 0], groups=[1, 2], k=2)
        with pytest.raises(DegenerateSampleError):
            single_test(sample, TWO_SAMPLE, preset_kernels()["K3"], reps=10, alpha=0.05, seed=0)

    def test_alpha_range(self, three_point):
        with pytest.raises(ValueError):
            single_test(three_point, TWO_SAMPLE, preset_kernels()["K3"], reps=10, alpha=1.5, seed=0)

    def test_mismatched_k(self, three_point):
        contrast = ContrastMatrix(entries=[[1.0, -1.0, 0.0]])
        with pytest.raises(ValueError):
            single_test(three_point, contrast, preset_kernels()["K3"], reps=10, alpha=0.05, seed=0)

    def test_decision_matches_quantile(self, rng):
        sample = random_sample(rng, 60, 2)
        result = single_test(sample, TWO_SAMPLE, preset_kernels()["K1"], reps=250, alpha=0.1, seed=3)
        assert result.reject == (result.statistic > result.critical_value)
        assert 0.0 < result.p_value <= 1.0
        assert (result.rank, result.null_dim) == (1, 1)
        assert result.hypothesis == "two-sample"

    def test_obvious_difference_rejects(self, rng):
        times = np.concatenate([rng.exponential(1.0, 60), rng.exponential(0.1, 60)])
        sample = SurvivalSample(times=times, status=np.ones(120, dtype=int), groups=[1] * 60 + [2] * 60, k=2)
        result = single_test(sample, TWO_SAMPLE, preset_kernels()["K2"], reps=200, alpha=0.05, seed=1)
        assert result.reject

    def test_defaults_from_settings(self, mocker, three_point):
        mocker.patch(
            "survtest.services.bootstrap.get_settings",
            return_value=Settings(reps=40, alpha=0.2, seed=8, weight_law="normal"),
        )
        result = single_test(three_point, TWO_SAMPLE, preset_kernels()["K3"])
        assert (result.reps, result.alpha, result.seed, result.weight_law) == (40, 0.2, 8, "normal")
