"""Multiple contrast testing: joint wild bootstrap with shared weights and the β̂_α search."""

import logging

import numpy as np

from survtest.config import get_settings
from survtest.exceptions import DegenerateSampleError, HypothesisError
from survtest.models.design import ContrastMatrix
from survtest.models.kernel import KernelSpec
from survtest.models.results import GramMatrix, LocalResult, MCTestResult, WeightLaw
from survtest.models.sample import SurvivalSample
from survtest.services.bootstrap import bootstrap_p_value, joint_draw_matrix
from survtest.services.contrasts import null_space_basis
from survtest.services.teststat import gram, statistic

logger = logging.getLogger(__name__)


def joint_wild_draws(
    grams: list[GramMatrix],
    reps: int,
    seed: int,
    weight_law: WeightLaw = "rademacher",
    weights: np.ndarray | None = None,
    n_jobs: int | None = None,
) -> np.ndarray:
    """reps x b draw matrix built from the same weight vector in each row."""
    if not grams:
        raise HypothesisError("at least one hypothesis is required")
    sizes = {g.n for g in grams}
    if len(sizes) != 1:
        raise HypothesisError(f"Gram matrices come from samples of different sizes: {sorted(sizes)}")
    return joint_draw_matrix(grams, reps, seed, weight_law, weights=weights, n_jobs=n_jobs)


def _grid_quantiles(sorted_draws: np.ndarray, j: int) -> np.ndarray:
    # column quantiles at level 1 − j/M, i.e. the (M − j)-th order statistic clamped to 1
    reps = sorted_draws.shape[0]
    return sorted_draws[max(reps - j, 1) - 1]


def _familywise_rate(draws: np.ndarray, sorted_draws: np.ndarray, j: int) -> float:
    exceed = draws > _grid_quantiles(sorted_draws, j)[None, :]
    return float(np.mean(np.any(exceed, axis=1)))


def beta_hat_search(draws: np.ndarray, alpha: float) -> float:
    """Largest β on {0, 1/M, …, 1} whose joint exceedance rate stays ≤ alpha (binary search)."""
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    reps = draws.shape[0]
    sorted_draws = np.sort(draws, axis=0)
    # the exceedance rate is non-decreasing in j and j = 0 is always feasible
    low, high = 0, reps
    while low < high:
        mid = (low + high + 1) // 2
        if _familywise_rate(draws, sorted_draws, mid) <= alpha:
            low = mid
        else:
            high = mid - 1
    return low / reps


def beta_hat_scan(draws: np.ndarray, alpha: float) -> float:
    """Exhaustive scan over every grid point; reference for beta_hat_search."""
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    reps = draws.shape[0]
    sorted_draws = np.sort(draws, axis=0)
    feasible = [j for j in range(reps + 1) if _familywise_rate(draws, sorted_draws, j) <= alpha]
    return max(feasible) / reps


def local_critical_values(draws: np.ndarray, beta: float) -> np.ndarray:
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    reps = draws.shape[0]
    return _grid_quantiles(np.sort(draws, axis=0), int(round(beta * reps)))


def mctest(
    sample: SurvivalSample,
    contrasts: list[ContrastMatrix],
    spec: KernelSpec,
    reps: int | None = None,
    alpha: float | None = None,
    seed: int | None = None,
    weight_law: WeightLaw | None = None,
    n_jobs: int | None = None,
) -> MCTestResult:
    """Simultaneous test of the local hypotheses C_iΛ = 0 with familywise level alpha."""
    settings = get_settings()
    reps = settings.reps if reps is None else reps
    alpha = settings.alpha if alpha is None else alpha
    seed = settings.seed if seed is None else seed
    weight_law = weight_law or settings.weight_law
    if not contrasts:
        raise HypothesisError("at least one hypothesis is required")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    if sample.n_events == 0:
        raise DegenerateSampleError("sample has no events; the test is undefined")
    for contrast in contrasts:
        if contrast.k != sample.k:
            raise HypothesisError(f"hypothesis '{contrast.label}' has {contrast.k} columns but k={sample.k}")

    grams = [gram(sample, null_space_basis(contrast), spec) for contrast in contrasts]
    observed = np.array([statistic(g) for g in grams])
    draws = joint_wild_draws(grams, reps, seed, weight_law, n_jobs=n_jobs)
    beta = beta_hat_search(draws, alpha)
    critical = local_critical_values(draws, beta)

    local_tests = [
        LocalResult(
            hypothesis=contrast.label,
            statistic=float(observed[i]),
            critical_value=float(critical[i]),
            p_value=bootstrap_p_value(draws[:, i], observed[i]),
            # a zero statistic carries no evidence even when every draw is zero too
            reject=bool(observed[i] >= critical[i] and observed[i] > 0.0),
        )
        for i, contrast in enumerate(contrasts)
    ]
    result = MCTestResult(
        local_tests=local_tests,
        beta_hat=beta,
        reject=any(local.reject for local in local_tests),
        reps=reps,
        alpha=alpha,
        seed=seed,
        weight_law=weight_law,
    )
    logger.info("multiple contrast: beta_hat=%.6g rejected=%s", beta, result.rejected)
    return result
