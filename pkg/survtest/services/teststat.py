"""Gram matrix assembly and the kernel log-rank statistic Υₙ(C)."""

import math

import numpy as np

from survtest.config import get_settings
from survtest.models.design import NullBasis
from survtest.models.kernel import KernelSpec
from survtest.models.results import GramMatrix
from survtest.models.sample import SurvivalSample
from survtest.services.engine import residual_vectors
from survtest.services.kernels import group_kernel_matrix, kernel_times, time_kernel_eval, time_kernel_matrix


def gram(sample: SurvivalSample, basis: NullBasis, spec: KernelSpec) -> GramMatrix:
    """G_ij = L(T_i,T_j)·a_iᵀ J a_j; rows of censored observations are zero."""
    residuals = residual_vectors(sample, basis)
    times = kernel_times(spec, sample.times)
    g = time_kernel_matrix(spec, times) * (residuals @ group_kernel_matrix(spec, sample.k) @ residuals.T)
    return GramMatrix(g=(g + g.T) / 2, n=sample.n)


def quadratic_form(g: GramMatrix, w: np.ndarray) -> float:
    """wᵀGw/n, clipped at zero; shared by the statistic and every bootstrap draw."""
    value = math.fsum(w * (g.g @ w)) / g.n
    return max(value, 0.0)


def statistic(g: GramMatrix) -> float:
    return quadratic_form(g, np.ones(g.n))


def brute_force_statistic(
    sample: SurvivalSample,
    basis: NullBasis,
    spec: KernelSpec,
    rank_tol: float | None = None,
) -> float:
    """Reference Υₙ summed term by term, with projections from normal-equation pseudo-inverses."""
    if rank_tol is None:
        rank_tol = get_settings().rank_tol
    n, k = sample.n, sample.k
    times = kernel_times(spec, sample.times)
    j_matrix = group_kernel_matrix(spec, k)
    events = np.flatnonzero(sample.status)
    if events.size == 0:
        return 0.0

    columns = np.zeros((events.size, k))
    for row, i in enumerate(events):
        y_t = np.array([np.sum((sample.times >= sample.times[i]) & (sample.groups == g)) for g in range(1, k + 1)])
        x_hat = np.diag(y_t.astype(float)) @ basis.columns / n
        singular = np.linalg.svd(x_hat, compute_uv=False)
        if singular[0] == 0.0 or np.sum(singular > rank_tol * singular[0]) < basis.d:
            continue
        q = np.eye(k) - x_hat @ np.linalg.pinv(x_hat)
        columns[row] = q[:, sample.groups[i] - 1]

    total = 0.0
    for row, i in enumerate(events):
        kernel_row = time_kernel_eval(spec, times[i], times[events])
        total += float(np.sum(kernel_row * np.einsum("l,lm,jm->j", columns[row], j_matrix, columns)))
    return total / n
