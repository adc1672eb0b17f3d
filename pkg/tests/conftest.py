import numpy as np
import pytest

from survtest.config import get_settings
from survtest.models.design import ContrastMatrix, NullBasis
from survtest.models.sample import SurvivalSample
from survtest.services.datasets import load_dataset, veteran_path

requires_slow = pytest.mark.skipif(
    not get_settings().run_slow,
    reason="long Monte Carlo run; set SURVTEST_RUN_SLOW=1 to enable",
)


def random_sample(rng: np.random.Generator, n: int, k: int, censor_rate: float = 0.3) -> SurvivalSample:
    """Exponential times with group-specific rates and exponential censoring."""
    groups = rng.integers(1, k + 1, size=n)
    survival = rng.exponential(1.0 / (0.5 + 0.25 * groups))
    censor = rng.exponential(1.0 / censor_rate, size=n)
    return SurvivalSample(
        times=np.minimum(survival, censor),
        status=(survival <= censor).astype(int),
        groups=groups,
        k=k,
    )


def random_contrast(rng: np.random.Generator, k: int) -> ContrastMatrix:
    r = int(rng.integers(1, k))
    entries = rng.standard_normal((r, k))
    return ContrastMatrix(entries=entries - entries.mean(axis=1, keepdims=True))


@pytest.fixture
def three_point() -> SurvivalSample:
    return SurvivalSample(times=[1.0, 2.0, 3.0], status=[1, 1, 1], groups=[1, 1, 2], k=2)


@pytest.fixture
def ones_basis() -> NullBasis:
    """V = (1, 1)ᵀ for the two-sample null Λ₁ = Λ₂."""
    return NullBasis(columns=[[1.0], [1.0]])


@pytest.fixture
def silent_sample() -> SurvivalSample:
    """Every event happens while the other group is empty, so every residual is zero."""
    return SurvivalSample(times=[1.0, 2.0, 3.0], status=[0, 1, 1], groups=[2, 1, 1], k=2)


@pytest.fixture(scope="session")
def veteran():
    return load_dataset(veteran_path(), factors=["trt", "celltype"])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)
