"""Counting-process machinery: risk sets, OLS projections, residuals and hazard estimators.

For an event at time t in group g the residual vector is a = Q̂(t)·e_g, where

    Q̂(t) = I_F(t) · (I − X̂ (X̂ᵀX̂)⁻¹ X̂ᵀ),   X̂(t) = diag(Y(t))·V / n

and I_F(t) indicates that X̂(t) has full column rank. Projections are built
from the thin SVD of X̂ and never from an explicit inverse of X̂ᵀX̂.
"""

import logging
import math
from collections.abc import Callable

import numpy as np
import scipy.linalg

from survtest.config import get_settings
from survtest.exceptions import DegenerateSampleError
from survtest.models.design import NullBasis
from survtest.models.sample import EventTable, ProjectionAt, StepFunction, SurvivalSample

logger = logging.getLogger(__name__)

WeightFunction = Callable[[float, int], float]


def _risk_matrix(sample: SurvivalSample, at_times: np.ndarray) -> np.ndarray:
    # Y_j(t) = #{i : T_i >= t, X_i = j}
    risk = np.empty((at_times.shape[0], sample.k), dtype=np.int64)
    for j in range(sample.k):
        group_times = np.sort(sample.times[sample.groups == j + 1])
        risk[:, j] = group_times.shape[0] - np.searchsorted(group_times, at_times, side="left")
    return risk


def risk_vector(sample: SurvivalSample, t: float) -> np.ndarray:
    return _risk_matrix(sample, np.array([t], dtype=float))[0]


def event_table(sample: SurvivalSample) -> EventTable:
    """Events sorted by time (ties by original index) with their risk vectors."""
    if sample.n_events == 0:
        raise DegenerateSampleError("sample has no events; there is nothing to test")
    order = np.argsort(sample.times, kind="stable")
    events = order[sample.status[order] == 1]
    times = sample.times[events]
    return EventTable(
        indices=events,
        times=times,
        groups=sample.groups[events],
        risk=_risk_matrix(sample, times),
    )


def _design_svd(y_t: np.ndarray, basis: NullBasis, n: int, rank_tol: float):
    x_hat = (np.asarray(y_t, dtype=float)[:, None] * basis.columns) / n
    u, s, vh = scipy.linalg.svd(x_hat, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return u, s, vh, 0
    return u, s, vh, int(np.sum(s > rank_tol * s[0]))


def projection_at(y_t: np.ndarray, basis: NullBasis, n: int, rank_tol: float | None = None) -> ProjectionAt:
    """Q̂(t) for the risk vector y_t; the zero matrix when X̂(t) is rank deficient."""
    if rank_tol is None:
        rank_tol = get_settings().rank_tol
    k = basis.k
    u, _, _, rank = _design_svd(y_t, basis, n, rank_tol)
    if rank < basis.d:
        return ProjectionAt(q=np.zeros((k, k)), full_rank=False)
    q = np.eye(k) - u @ u.T
    return ProjectionAt(q=(q + q.T) / 2, full_rank=True)


def _unique_event_times(sample: SurvivalSample):
    """Sorted event rows plus, for each, the index of its distinct event time."""
    order = np.argsort(sample.times, kind="stable")
    events = order[sample.status[order] == 1]
    unique_times, inverse = np.unique(sample.times[events], return_inverse=True)
    return events, unique_times, inverse


def residual_vectors(sample: SurvivalSample, basis: NullBasis, rank_tol: float | None = None) -> np.ndarray:
    """n x k matrix whose row i is a_i = Δ_i · Q̂(T_i) e_{X_i}."""
    if basis.k != sample.k:
        raise ValueError(f"basis has {basis.k} rows but the sample has k={sample.k}")
    residuals = np.zeros((sample.n, sample.k))
    events, unique_times, inverse = _unique_event_times(sample)
    if events.size == 0:
        return residuals
    risk = _risk_matrix(sample, unique_times)
    for position, t in enumerate(unique_times):
        projection = projection_at(risk[position], basis, sample.n, rank_tol)
        if not projection.full_rank:
            logger.debug("design rank deficient at t=%g; events there contribute nothing", t)
            continue
        rows = events[inverse == position]
        residuals[rows] = projection.q[:, sample.groups[rows] - 1].T
    return residuals


def last_full_rank_time(sample: SurvivalSample, basis: NullBasis, rank_tol: float | None = None) -> float | None:
    """τ_H: the last event time at which diag(Y)·V keeps full column rank."""
    _, unique_times, _ = _unique_event_times(sample)
    if unique_times.size == 0:
        return None
    risk = _risk_matrix(sample, unique_times)
    for position in range(unique_times.size - 1, -1, -1):
        if projection_at(risk[position], basis, sample.n, rank_tol).full_rank:
            return float(unique_times[position])
    return None


def weighted_logrank(sample: SurvivalSample, basis: NullBasis, weight: WeightFunction) -> float:
    """Û₀ = n^{-1/2} Σ_events Σ_ℓ w(T_i, ℓ) (a_i)_ℓ."""
    residuals = residual_vectors(sample, basis)
    total = 0.0
    for i in np.flatnonzero(sample.status):
        t = float(sample.times[i])
        total += sum(weight(t, group) * residuals[i, group - 1] for group in range(1, sample.k + 1))
    return total / math.sqrt(sample.n)


def logrank_weight(t: float, group: int) -> float:
    return 1.0


def crossing_weight(sample: SurvivalSample) -> WeightFunction:
    """w(t) = 1 − 2·F̂(t), F̂ the pooled empirical distribution of observed times."""
    sorted_times = np.sort(sample.times)

    def weight(t: float, group: int) -> float:
        below = np.searchsorted(sorted_times, t, side="right")
        return 1.0 - 2.0 * below / sorted_times.size

    return weight


def constrained_cumhaz(sample: SurvivalSample, basis: NullBasis, rank_tol: float | None = None) -> StepFunction:
    """Λ̂ under CΛ = 0: jumps (1/n)·I_F·V·X̂⁺·dN at each distinct event time."""
    events, unique_times, inverse = _unique_event_times(sample)
    if events.size == 0:
        return StepFunction(times=np.zeros(0), values=np.zeros((0, sample.k)))
    if rank_tol is None:
        rank_tol = get_settings().rank_tol
    risk = _risk_matrix(sample, unique_times)
    jumps = np.zeros((unique_times.size, sample.k))
    for position in range(unique_times.size):
        u, s, vh, rank = _design_svd(risk[position], basis, sample.n, rank_tol)
        if rank < basis.d:
            continue
        d_n = np.bincount(sample.groups[events[inverse == position]] - 1, minlength=sample.k)
        d_b = vh.T @ ((u.T @ d_n) / s) / sample.n
        jumps[position] = basis.columns @ d_b
    return StepFunction(times=unique_times, values=np.cumsum(jumps, axis=0))


def nelson_aalen(sample: SurvivalSample) -> StepFunction:
    """Per-group Nelson–Aalen estimates; column j is group j+1."""
    events, unique_times, inverse = _unique_event_times(sample)
    if events.size == 0:
        return StepFunction(times=np.zeros(0), values=np.zeros((0, sample.k)))
    risk = _risk_matrix(sample, unique_times)
    d_n = np.zeros((unique_times.size, sample.k))
    np.add.at(d_n, (inverse, sample.groups[events] - 1), 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        jumps = np.where(risk > 0, d_n / np.maximum(risk, 1), 0.0)
    return StepFunction(times=unique_times, values=np.cumsum(jumps, axis=0))
