"""Wild bootstrap calibration of the kernel log-rank statistic.

Replicate ℓ draws its weight vector from block ℓ // BLOCK_SIZE of a generator
keyed by (seed, block). Blocks are always generated whole and then sliced,
so a replicate's weights depend only on (seed, ℓ, n, weight law), never on
M or on how blocks are spread over workers.
"""

import logging
import math

import numpy as np

from survtest.config import get_settings
from survtest.exceptions import DegenerateSampleError
from survtest.models.design import ContrastMatrix
from survtest.models.kernel import KernelSpec
from survtest.models.results import BootstrapDraws, GramMatrix, TestResult, WeightLaw
from survtest.models.sample import SurvivalSample
from survtest.services.contrasts import null_space_basis
from survtest.services.engine import last_full_rank_time
from survtest.services.teststat import gram, quadratic_form, statistic
from survtest.workers import parallel_map

logger = logging.getLogger(__name__)

BLOCK_SIZE = 256


def weight_block(seed: int, block: int, n: int, weight_law: WeightLaw) -> np.ndarray:
    """BLOCK_SIZE x n weight matrix with E(W)=0, Var(W)=1."""
    rng = np.random.default_rng([seed, block])
    if weight_law == "rademacher":
        return rng.integers(0, 2, size=(BLOCK_SIZE, n)).astype(float) * 2.0 - 1.0
    if weight_law == "normal":
        return rng.standard_normal((BLOCK_SIZE, n))
    raise ValueError(f"unknown weight law '{weight_law}'")


def joint_draw_matrix(
    grams: list[GramMatrix],
    reps: int,
    seed: int,
    weight_law: WeightLaw,
    weights: np.ndarray | None = None,
    n_jobs: int | None = None,
) -> np.ndarray:
    """reps x b matrix; row ℓ applies one weight vector W^(ℓ) to every Gram matrix."""
    if reps < 1:
        raise ValueError("the number of bootstrap replicates must be at least 1")
    n = grams[0].n
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (reps, n):
            raise ValueError(f"forced weights must have shape ({reps}, {n})")
        return np.array([[quadratic_form(g, w) for g in grams] for w in weights]).reshape(reps, len(grams))

    def run_block(block: int) -> np.ndarray:
        rows = min(BLOCK_SIZE, reps - block * BLOCK_SIZE)
        block_weights = weight_block(seed, block, n, weight_law)[:rows]
        return np.array([[quadratic_form(g, w) for g in grams] for w in block_weights])

    blocks = parallel_map(run_block, range(math.ceil(reps / BLOCK_SIZE)), n_jobs)
    return np.vstack(blocks).reshape(reps, len(grams))


def wild_draws(
    g: GramMatrix,
    reps: int,
    seed: int,
    weight_law: WeightLaw = "rademacher",
    weights: np.ndarray | None = None,
    n_jobs: int | None = None,
) -> BootstrapDraws:
    """Draws WᵀGW/n; `weights` forces the weight vectors (one row per draw)."""
    values = joint_draw_matrix([g], reps, seed, weight_law, weights=weights, n_jobs=n_jobs)[:, 0]
    return BootstrapDraws(values=values, seed=seed, weight_law=weight_law)


def quantile_index(level: float, reps: int) -> int:
    """1-based order statistic ⌈level·M⌉ clamped to [1, M]."""
    if not 0.0 <= level <= 1.0:
        raise ValueError("quantile level must lie in [0, 1]")
    # round away float noise such as (1 - 3/M)·M = M - 3 + 1e-13
    return min(max(math.ceil(round(level * reps, 9)), 1), reps)


def empirical_quantile(draws: np.ndarray, level: float) -> float:
    values = np.sort(np.asarray(draws, dtype=float))
    return float(values[quantile_index(level, values.shape[0]) - 1])


def bootstrap_p_value(draws: np.ndarray, observed: float) -> float:
    """(1 + #{draws ≥ observed}) / (M + 1)."""
    draws = np.asarray(draws)
    return float((1 + np.count_nonzero(draws >= observed)) / (draws.shape[0] + 1))


def single_test(
    sample: SurvivalSample,
    contrast: ContrastMatrix,
    spec: KernelSpec,
    reps: int | None = None,
    alpha: float | None = None,
    seed: int | None = None,
    weight_law: WeightLaw | None = None,
    n_jobs: int | None = None,
) -> TestResult:
    """Kernel log-rank test of CΛ = 0 calibrated by the wild bootstrap."""
    settings = get_settings()
    reps = settings.reps if reps is None else reps
    alpha = settings.alpha if alpha is None else alpha
    seed = settings.seed if seed is None else seed
    weight_law = weight_law or settings.weight_law
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    if sample.n_events == 0:
        raise DegenerateSampleError("sample has no events; the test is undefined")
    if contrast.k != sample.k:
        raise ValueError(f"contrast has {contrast.k} columns but the sample has k={sample.k}")

    basis = null_space_basis(contrast)
    g = gram(sample, basis, spec)
    observed = statistic(g)
    draws = wild_draws(g, reps, seed, weight_law, n_jobs=n_jobs).values
    critical = empirical_quantile(draws, 1.0 - alpha)
    result = TestResult(
        hypothesis=contrast.label,
        statistic=observed,
        critical_value=critical,
        p_value=bootstrap_p_value(draws, observed),
        reject=observed > critical,
        reps=reps,
        alpha=alpha,
        seed=seed,
        weight_law=weight_law,
        rank=basis.k - basis.d,
        null_dim=basis.d,
        tau_h=last_full_rank_time(sample, basis),
    )
    logger.info(
        "%s: statistic=%.6g critical=%.6g p=%.4g reject=%s",
        result.hypothesis, result.statistic, result.critical_value, result.p_value, result.reject,
    )
    return result
