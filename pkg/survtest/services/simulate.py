"""Data A/B/C generators, censoring regimes and Monte Carlo power studies."""

import logging

import numpy as np
import scipy.integrate

from survtest.config import get_settings
from survtest.exceptions import DegenerateSampleError, SimulationError
from survtest.models.kernel import KernelSpec
from survtest.models.results import PowerRow, WeightLaw
from survtest.models.sample import SurvivalSample
from survtest.models.simulation import CensoringSpec, HazardSpec, Regime, ScenarioConfig
from survtest.services.bootstrap import single_test
from survtest.services.contrasts import parse_hypothesis, split_rows
from survtest.services.kernels import preset_kernels
from survtest.services.multiple import mctest
from survtest.workers import parallel_map

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 200
TIME_TOLERANCE = 1e-10

EXPONENTIAL_RATES = {
    "A": {"low": 0.1, "medium": 0.5, "high": 2.0},
    "B": {"low": 0.1, "medium": 0.3, "high": 0.6},
}
DATA_C_RATES = {"low": 0.1, "medium": 0.5, "high": 1.0}

_DATA_A = {(1, 1): 1.0, (2, 1): 2.0, (1, 2): 2.0, (2, 2): 1.0, (1, 3): 1.0, (2, 3): 1.0}
_DATA_B = {(1, 1): "cos2", (2, 1): "sin2", (1, 2): "sin2", (2, 2): "cos2", (1, 3): "constant", (2, 3): "constant"}


def _phi(i: int, t: np.ndarray, cumulative: bool) -> np.ndarray:
    if i == 1:
        return -5 * t / 24 + 0.75 * np.log1p(t**2) if cumulative else -5 / 24 + 1.5 * t / (1 + t**2)
    if i == 2:
        return 13 * t / 24 - 0.75 * np.log1p(t**2) if cumulative else 13 / 24 - 1.5 * t / (1 + t**2)
    return -t / 3 if cumulative else np.full_like(t, -1 / 3)


def _data_c_slope(spec: HazardSpec) -> float:
    # constant part of λ_ij: λ0 + ψ_j + σ_ij
    i, j = spec.cell
    psi = {1: -0.5, 2: 0.0, 3: 0.5}[j]
    sigma = 5 * spec.theta / 6 if (i, j) == (1, 2) else -spec.theta / 6
    return 29 / 8 + spec.theta + psi + sigma


def cumulative_hazard(spec: HazardSpec, t):
    """Λ(t) in closed form; broadcasts over arrays."""
    t = np.asarray(t, dtype=float)
    if spec.family == "constant":
        return spec.rate * t
    if spec.family == "cos2":
        return t / 2 + np.sin(4 * t) / 8
    if spec.family == "sin2":
        return t / 2 - np.sin(4 * t) / 8
    if spec.family == "weibull":
        return (spec.rate * t) ** spec.shape
    return _data_c_slope(spec) * t + _phi(spec.cell[0], t, cumulative=True)


def hazard_rate(spec: HazardSpec, t):
    t = np.asarray(t, dtype=float)
    if spec.family == "constant":
        return np.full_like(t, spec.rate)
    if spec.family == "cos2":
        return np.cos(2 * t) ** 2
    if spec.family == "sin2":
        return np.sin(2 * t) ** 2
    if spec.family == "weibull":
        return spec.shape * spec.rate**spec.shape * t ** (spec.shape - 1)
    return _data_c_slope(spec) + _phi(spec.cell[0], t, cumulative=False)


def _invert(spec: HazardSpec, targets: np.ndarray) -> np.ndarray:
    """Solve Λ(t) = target by bracket doubling and bisection."""
    low = np.zeros_like(targets)
    high = np.ones_like(targets)
    for _ in range(MAX_ITERATIONS):
        short = cumulative_hazard(spec, high) < targets
        if not short.any():
            break
        high[short] *= 2.0
    else:
        raise SimulationError(f"could not bracket the inverse of {spec.family} hazard; is Λ unbounded?")
    logger.debug("bracket for %s hazard reaches t=%g", spec.family, high.max())
    for _ in range(MAX_ITERATIONS):
        if np.max(high - low) <= TIME_TOLERANCE:
            return (low + high) / 2
        middle = (low + high) / 2
        below = cumulative_hazard(spec, middle) < targets
        low = np.where(below, middle, low)
        high = np.where(below, high, middle)
    raise SimulationError(f"bisection for the {spec.family} hazard did not converge in {MAX_ITERATIONS} steps")


def sample_times(spec: HazardSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """Inverse-transform draws: t with Λ(t) = E, E ~ Exp(1)."""
    targets = rng.standard_exponential(size)
    if spec.family == "constant":
        return targets / spec.rate
    if spec.family == "weibull":
        return targets ** (1 / spec.shape) / spec.rate
    return _invert(spec, targets)


def sample_time(spec: HazardSpec, rng: np.random.Generator) -> float:
    return float(sample_times(spec, rng, 1)[0])


def data_c_hazard(cell: tuple[int, int], theta: float) -> HazardSpec:
    if theta < -1:
        raise SimulationError(f"theta must be at least -1, got {theta}")
    return HazardSpec(family="data_c", theta=theta, cell=cell, tag=f"C{cell[0]}{cell[1]}(theta={theta:g})")


def survival_hazards(config: ScenarioConfig) -> list[HazardSpec]:
    """Hazard of each group, in group order."""
    hazards = []
    for cell in config.factorial_design().level_tuples():
        if config.design == "A":
            hazards.append(HazardSpec(family="constant", rate=_DATA_A[cell], tag=f"lambda={_DATA_A[cell]:g}"))
        elif config.design == "B":
            hazards.append(HazardSpec(family=_DATA_B[cell], tag=_DATA_B[cell]))
        else:
            hazards.append(data_c_hazard(cell, config.theta))
    return hazards


def censoring_for(config: ScenarioConfig) -> CensoringSpec:
    """Exponential(γ) for A/B; for C the family depends on the level of factor I only."""
    cells = config.factorial_design().level_tuples()
    if config.design in EXPONENTIAL_RATES:
        gamma = EXPONENTIAL_RATES[config.design][config.censoring]
        hazards = [HazardSpec(family="constant", rate=gamma, tag=f"exp({gamma:g})") for _ in cells]
    else:
        r_c = DATA_C_RATES[config.censoring]
        shapes = {1: 1.0, 2: 0.5, 3: 1.5}
        hazards = [
            HazardSpec(family="weibull", rate=r_c, shape=shapes[cell[0]], tag=f"weibull({shapes[cell[0]]:g},{r_c:g})")
            for cell in cells
        ]
    return CensoringSpec(regime=config.censoring, hazards=hazards)


def simulate_group(
    hazard: HazardSpec, censoring: HazardSpec, size: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    survival = sample_times(hazard, rng, size)
    censor = sample_times(censoring, rng, size)
    return np.minimum(survival, censor), (survival <= censor).astype(np.int64)


def generate_dataset(config: ScenarioConfig, rng: np.random.Generator) -> SurvivalSample:
    sizes = config.group_sizes()
    censoring = censoring_for(config)
    times, status, groups = [], [], []
    for group, (hazard, censor, size) in enumerate(zip(survival_hazards(config), censoring.hazards, sizes), start=1):
        group_times, group_status = simulate_group(hazard, censor, int(size), rng)
        times.append(group_times)
        status.append(group_status)
        groups.append(np.full(int(size), group))
    return SurvivalSample(
        times=np.concatenate(times),
        status=np.concatenate(status),
        groups=np.concatenate(groups),
        k=len(sizes),
    )


def censoring_probability(hazard: HazardSpec, censoring: HazardSpec) -> float:
    """P(C < Z) = 1 − ∫ λ_Z(t) exp(−Λ_Z(t) − Λ_C(t)) dt."""
    observed, _ = scipy.integrate.quad(
        lambda t: hazard_rate(hazard, t) * np.exp(-cumulative_hazard(hazard, t) - cumulative_hazard(censoring, t)),
        0.0,
        np.inf,
        limit=200,
    )
    return 1.0 - observed


def _replicate_seed(seed: int, cell: int, replicate: int) -> int:
    return int(np.random.SeedSequence([seed, cell, replicate, 1]).generate_state(1)[0])


def power_study(
    grid: list[ScenarioConfig],
    hypothesis: str,
    kernels: list[KernelSpec],
    reps: int | None = None,
    alpha: float | None = None,
    seed: int | None = None,
    include_multiple: bool = False,
    weight_law: WeightLaw | None = None,
    n_jobs: int | None = None,
) -> list[PowerRow]:
    """Rejection rate and Monte Carlo standard error per grid cell and kernel.

    Replicate r of cell c draws its data from a generator keyed by (seed, c, r),
    so the table is reproducible for any number of workers.
    """
    if not grid:
        raise SimulationError("the power-study grid is empty")
    settings = get_settings()
    reps = settings.reps if reps is None else reps
    alpha = settings.alpha if alpha is None else alpha
    seed = settings.seed if seed is None else seed
    multiple_kernel = preset_kernels()["K3"]
    labels = [spec.name or spec.describe() for spec in kernels] + (["M"] if include_multiple else [])

    rows = []
    for cell, config in enumerate(grid):
        contrast = parse_hypothesis(config.factorial_design(), hypothesis)
        local_contrasts = split_rows(contrast)

        def run_replicate(replicate: int) -> list[bool]:
            sample = generate_dataset(config, np.random.default_rng([seed, cell, replicate]))
            boot_seed = _replicate_seed(seed, cell, replicate)
            try:
                decisions = [
                    single_test(sample, contrast, spec, reps, alpha, boot_seed, weight_law, n_jobs=1).reject
                    for spec in kernels
                ]
                if include_multiple:
                    result = mctest(sample, local_contrasts, multiple_kernel, reps, alpha, boot_seed, weight_law, n_jobs=1)
                    decisions.append(result.reject)
            except DegenerateSampleError:
                logger.warning("replicate %d of cell %d has no events; counted as not rejected", replicate, cell)
                decisions = [False] * len(labels)
            return decisions

        decisions = np.array(parallel_map(run_replicate, range(config.replications), n_jobs), dtype=float)
        n_total = int(config.group_sizes().sum())
        for column, label in enumerate(labels):
            rows.append(
                PowerRow.from_rejections(
                    decisions[:, column],
                    design=config.design,
                    censoring=config.censoring,
                    size_multiplier=config.size_label,
                    theta=config.theta,
                    n_total=n_total,
                    kernel=label,
                )
            )
        logger.info(
            "cell %d (%s, %s, %s, theta=%g) done: %s",
            cell, config.design, config.censoring, config.size_label, config.theta,
            ", ".join(f"{row.kernel}={row.rejection_rate:.3f}" for row in rows[-len(labels):]),
        )
    return rows
