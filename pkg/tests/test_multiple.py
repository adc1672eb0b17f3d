import numpy as np
import pytest

from survtest.exceptions import HypothesisError
from survtest.models.design import ContrastMatrix
from survtest.models.results import GramMatrix
from survtest.services.bootstrap import empirical_quantile, single_test, wild_draws
from survtest.services.contrasts import null_space_basis, parse_hypothesis, split_rows
from survtest.services.kernels import parse_kernel, preset_kernels
from survtest.services.multiple import (
    beta_hat_scan,
    beta_hat_search,
    joint_wild_draws,
    local_critical_values,
    mctest,
)
from survtest.services.teststat import gram, statistic
from tests.conftest import random_contrast, random_sample, requires_slow

TWO_SAMPLE = ContrastMatrix(entries=[[1.0, -1.0]], label="two-sample")


@pytest.fixture
def grams(rng) -> list[GramMatrix]:
    sample = random_sample(rng, 40, 3)
    spec = preset_kernels()["K3"]
    contrasts = [ContrastMatrix(entries=[[1.0, -1.0, 0.0]]), ContrastMatrix(entries=[[1.0, 0.0, -1.0]])]
    return [gram(sample, null_space_basis(contrast), spec) for contrast in contrasts]


class TestJointWildDraws:
    def test_single_hypothesis_matches_wild_draws(self, grams):
        joint = joint_wild_draws(grams[:1], 300, seed=6)
        np.testing.assert_array_equal(joint[:, 0], wild_draws(grams[0], 300, seed=6).values)

    def test_duplicated_hypothesis_gives_equal_columns(self, grams):
        joint = joint_wild_draws([grams[0], grams[0]], 200, seed=2)
        np.testing.assert_array_equal(joint[:, 0], joint[:, 1])

    def test_unit_weights_give_statistics(self, grams):
        joint = joint_wild_draws(grams, 3, seed=0, weights=np.ones((3, grams[0].n)))
        np.testing.assert_array_equal(joint, [[statistic(g) for g in grams]] * 3)

    def test_empty(self):
        with pytest.raises(HypothesisError):
            joint_wild_draws([], 10, seed=0)

    def test_mismatched_sizes(self, grams):
        with pytest.raises(HypothesisError):
            joint_wild_draws([grams[0], GramMatrix(g=np.zeros((3, 3)), n=3)], 10, seed=0)


class TestBetaHat:
    def test_single_column_distinct_draws(self, rng):
        draws = rng.permutation(20).astype(float)[:, None]
        assert beta_hat_search(draws, 0.05) == pytest.approx(1 / 20)
        assert beta_hat_scan(draws, 0.05) == pytest.approx(1 / 20)
        assert beta_hat_search(draws, 0.2) == pytest.approx(4 / 20)

    def test_alpha_below_grid_step(self, rng):
        draws = rng.permutation(20).astype(float)[:, None]
        assert beta_hat_search(draws, 0.049) == 0.0

    def test_perfectly_dependent_columns(self, rng):
        column = rng.standard_normal(100)
        assert beta_hat_search(np.column_stack([column, column]), 0.05) == beta_hat_search(column[:, None], 0.05)

    def test_search_matches_scan(self, rng):
        for _ in range(200):
            reps, b = int(rng.integers(5, 60)), int(rng.integers(1, 6))
            draws = rng.exponential(size=(reps, b))
            if rng.random() < 0.3:
                draws = np.round(draws, 1)
            alpha = float(rng.uniform(0.01, 0.3))
            assert beta_hat_search(draws, alpha) == beta_hat_scan(draws, alpha)

    def test_non_decreasing_in_alpha(self, rng):
        for _ in range(300):
            reps, b = int(rng.integers(5, 80)), int(rng.integers(1, 6))
            draws = rng.exponential(size=(reps, b))
            if rng.random() < 0.3:
                draws = np.round(draws, 1)
            alphas = np.sort(rng.uniform(0.0, 0.5, size=5))
            betas = [beta_hat_search(draws, float(alpha)) for alpha in alphas]
            assert betas == sorted(betas)

    def test_local_critical_value_is_quantile(self, rng):
        draws = rng.exponential(size=(200, 1))
        beta = beta_hat_search(draws, 0.05)
        assert local_critical_values(draws, beta)[0] == empirical_quantile(draws[:, 0], 1 - beta)


class TestMCTest:
    def test_zero_statistics_never_reject(self, silent_sample):
        contrasts = [TWO_SAMPLE, ContrastMatrix(entries=[[2.0, -2.0]], label="scaled")]
        result = mctest(silent_sample, contrasts, preset_kernels()["K3"], reps=100, alpha=0.05, seed=0)
        assert not result.reject
        assert result.rejected == []

    def test_empty_hypothesis_list(self, three_point):
        with pytest.raises(HypothesisError):
            mctest(three_point, [], preset_kernels()["K3"], reps=10, alpha=0.05, seed=0)

    def test_mismatched_k(self, three_point):
        with pytest.raises(HypothesisError):
            mctest(three_point, [ContrastMatrix(entries=[[1.0, -1.0, 0.0]])], preset_kernels()["K3"], reps=10)

    def test_single_hypothesis_matches_single_test(self, rng):
        spec = preset_kernels()["K1"]
        for case in range(200):
            k = int(rng.integers(2, 7))
            sample = random_sample(rng, int(rng.integers(20, 61)), k)
            if sample.n_events == 0:
                continue
            contrast = random_contrast(rng, k)
            single = single_test(sample, contrast, spec, reps=200, alpha=0.05, seed=case, weight_law="normal")
            multiple = mctest(sample, [contrast], spec, reps=200, alpha=0.05, seed=case, weight_law="normal")
            (local,) = multiple.local_tests
            assert local.statistic == single.statistic
            assert local.p_value == single.p_value
            if multiple.beta_hat == 0.05:
                assert local.critical_value == single.critical_value
                if local.statistic != local.critical_value:
                    assert local.reject == single.reject

    def test_veteran_celltype_locals(self, veteran):
        sample, design = veteran
        local = split_rows(parse_hypothesis(design, "effect:celltype"))
        spec = parse_kernel("K3", rescale_times=True)
        result = mctest(sample, local, spec, reps=200, alpha=0.05, seed=1, weight_law="normal")
        assert [test.hypothesis for test in result.local_tests] == [
            "L11=L12", "L11=L13", "L11=L14", "L21=L22", "L21=L23", "L21=L24",
        ]
        assert 0.0 <= result.beta_hat <= 0.05
        for test in result.local_tests:
            assert test.reject == (test.statistic >= test.critical_value and test.statistic > 0)

    @requires_slow
    def test_veteran_celltype_rejections(self, veteran):
        sample, design = veteran
        local = split_rows(parse_hypothesis(design, "effect:celltype"))
        result = mctest(sample, local, parse_kernel("K3", rescale_times=True), reps=100_000, alpha=0.05, seed=1)
        assert set(result.rejected) == {"L11=L13", "L21=L24"}
