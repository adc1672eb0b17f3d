import numpy as np
import pytest

from survtest.models.design import ContrastMatrix, NullBasis
from survtest.models.kernel import GroupKernel, KernelSpec, TimeKernel
from survtest.models.results import GramMatrix
from survtest.models.sample import SurvivalSample
from survtest.services.contrasts import null_space_basis
from survtest.services.kernels import preset_kernels
from survtest.services.teststat import brute_force_statistic, gram, quadratic_form, statistic
from tests.conftest import random_contrast, random_sample, requires_slow


def _random_kernel(rng: np.random.Generator) -> KernelSpec:
    return KernelSpec(
        time_kernel=TimeKernel(family=str(rng.choice(["se", "ou"])), scale=float(rng.uniform(0.05, 5.0))),
        group_kernel=GroupKernel(family="rq", a=float(rng.uniform(0.5, 3.0)), b=float(rng.uniform(0.5, 2.0))),
        rescale_times=bool(rng.integers(0, 2)),
    )


def _oracle_cases(rng: np.random.Generator, cases: int, max_n: int):
    for _ in range(cases):
        k = int(rng.integers(2, 10))
        n = int(rng.integers(k, max_n + 1))
        yield random_sample(rng, n, k), null_space_basis(random_contrast(rng, k)), _random_kernel(rng)


class TestGram:
    def test_all_censored_is_zero(self, ones_basis):
        sample = SurvivalSample(times=[1.0, 2.0, 3.0], status=[0, 0, 0], groups=[1, 2, 1], k=2)
        np.testing.assert_array_equal(gram(sample, ones_basis, preset_kernels()["K3"]).g, 0.0)

    def test_single_event_entry(self, ones_basis):
        sample = SurvivalSample(times=[1.0, 2.0], status=[1, 0], groups=[1, 2], k=2)
        spec = KernelSpec(group_kernel=GroupKernel(family="identity"))
        g = gram(sample, ones_basis, spec).g
        assert g[0, 0] == pytest.approx(0.5)
        assert g[1, 1] == 0.0

    def test_tied_events_share_entries(self, ones_basis):
        sample = SurvivalSample(times=[1.0, 1.0, 2.0], status=[1, 1, 0], groups=[1, 1, 2], k=2)
        g = gram(sample, ones_basis, preset_kernels()["K3"]).g
        assert g[0, 1] == pytest.approx(g[0, 0])

    def test_symmetric_psd_with_zero_censored_rows(self, rng):
        sample = random_sample(rng, 80, 5)
        g = gram(sample, null_space_basis(random_contrast(rng, 5)), preset_kernels()["K2"]).g
        np.testing.assert_array_equal(g, g.T)
        eigenvalues = np.linalg.eigvalsh(g)
        assert eigenvalues.min() >= -1e-8 * max(eigenvalues.max(), 1.0)
        np.testing.assert_array_equal(g[sample.status == 0], 0.0)


class TestStatistic:
    def test_zero_gram(self):
        assert statistic(GramMatrix(g=np.zeros((3, 3)), n=3)) == 0.0

    def test_constant_gram(self):
        assert statistic(GramMatrix(g=[[0.5, 0.5], [0.5, 0.5]], n=2)) == 1.0

    def test_quadratic_form_with_unit_weights_is_statistic(self, rng):
        sample = random_sample(rng, 30, 3)
        g = gram(sample, null_space_basis(random_contrast(rng, 3)), preset_kernels()["K1"])
        assert quadratic_form(g, np.ones(30)) == statistic(g)

    def test_non_negative(self, rng):
        for sample, basis, spec in _oracle_cases(rng, 20, 40):
            assert statistic(gram(sample, basis, spec)) >= 0.0


class TestBruteForce:
    def test_all_censored(self, ones_basis):
        sample = SurvivalSample(times=[1.0, 2.0], status=[0, 0], groups=[1, 2], k=2)
        assert brute_force_statistic(sample, ones_basis, preset_kernels()["K3"]) == 0.0

    def test_two_sample(self, rng):
        sample = random_sample(rng, 10, 2)
        basis = null_space_basis(ContrastMatrix(entries=[[1.0, -1.0]]))
        spec = preset_kernels()["K2"]
        assert statistic(gram(sample, basis, spec)) == pytest.approx(
            brute_force_statistic(sample, basis, spec), rel=1e-10, abs=1e-14
        )

    def test_matches_closed_form(self, rng):
        for sample, basis, spec in _oracle_cases(rng, 40, 60):
            fast = statistic(gram(sample, basis, spec))
            assert fast == pytest.approx(brute_force_statistic(sample, basis, spec), rel=1e-10, abs=1e-14)

    @requires_slow
    def test_matches_closed_form_fuzz(self, rng):
        for sample, basis, spec in _oracle_cases(rng, 500, 200):
            fast = statistic(gram(sample, basis, spec))
            assert fast == pytest.approx(brute_force_statistic(sample, basis, spec), rel=1e-10, abs=1e-14)


class TestInvariance:
    def test_independent_of_basis(self, rng):
        for _ in range(20):
            k = int(rng.integers(2, 7))
            sample = random_sample(rng, 50, k)
            basis = null_space_basis(random_contrast(rng, k))
            rotation, _ = np.linalg.qr(rng.standard_normal((basis.d, basis.d)))
            other = NullBasis(columns=basis.columns @ rotation)
            spec = preset_kernels()["K3"]
            assert statistic(gram(sample, other, spec)) == pytest.approx(
                statistic(gram(sample, basis, spec)), rel=1e-8, abs=1e-14
            )

    def test_row_scaling_of_contrast(self, rng):
        for _ in range(20):
            k = int(rng.integers(2, 7))
            sample = random_sample(rng, 50, k)
            contrast = random_contrast(rng, k)
            mixing = rng.standard_normal((contrast.r, contrast.r)) + 3 * np.eye(contrast.r)
            scaled = ContrastMatrix(entries=mixing @ contrast.entries)
            spec = preset_kernels()["K1"]
            assert statistic(gram(sample, null_space_basis(scaled), spec)) == pytest.approx(
                statistic(gram(sample, null_space_basis(contrast), spec)), rel=1e-8, abs=1e-14
            )
