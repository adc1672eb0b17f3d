import numpy as np
from pydantic import BaseModel, model_validator

from survtest.models.common import ARRAY_CONFIG, FloatArray, IntArray


class SurvivalSample(BaseModel):
    """n right-censored observations with group labels 1..k."""

    times: FloatArray
    status: IntArray
    groups: IntArray
    k: int

    model_config = ARRAY_CONFIG

    @model_validator(mode="after")
    def _check(self) -> "SurvivalSample":
        n = self.times.shape[0]
        if self.times.ndim != 1 or self.status.shape != (n,) or self.groups.shape != (n,):
            raise ValueError("times, status and groups must be vectors of equal length")
        if n == 0:
            raise ValueError("sample is empty")
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if not np.all(np.isfinite(self.times)) or np.any(self.times <= 0):
            raise ValueError("all times must be finite and positive")
        if not np.all(np.isin(self.status, (0, 1))):
            raise ValueError("status values must be 0 or 1")
        if np.any(self.groups < 1) or np.any(self.groups > self.k):
            raise ValueError(f"group labels must lie in 1..{self.k}")
        return self

    @property
    def n(self) -> int:
        return self.times.shape[0]

    @property
    def n_events(self) -> int:
        return int(self.status.sum())

    def group_counts(self) -> np.ndarray:
        return np.bincount(self.groups - 1, minlength=self.k)


class EventTable(BaseModel):
    """Observed events in ascending time order with the risk vector Y(t) at each."""

    indices: IntArray
    times: FloatArray
    groups: IntArray
    risk: IntArray

    model_config = ARRAY_CONFIG


class ProjectionAt(BaseModel):
    q: FloatArray
    full_rank: bool

    model_config = ARRAY_CONFIG


class StepFunction(BaseModel):
    """Right-continuous vector-valued step function; zero before the first jump."""

    times: FloatArray
    values: FloatArray

    model_config = ARRAY_CONFIG

    def at(self, t: float) -> np.ndarray:
        position = int(np.searchsorted(self.times, t, side="right"))
        if position == 0:
            return np.zeros(self.values.shape[1])
        return self.values[position - 1].copy()
