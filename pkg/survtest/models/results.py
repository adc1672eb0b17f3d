from typing import Literal

import numpy as np
from pydantic import BaseModel

from survtest.models.common import ARRAY_CONFIG, FloatArray
from survtest.models.kernel import KernelSpec

WeightLaw = Literal["rademacher", "normal"]


class GramMatrix(BaseModel):
    """G_ij = L(T_i,T_j)·a_iᵀ J a_j; Υₙ = 1ᵀG1/n."""

    g: FloatArray
    n: int

    model_config = ARRAY_CONFIG


class BootstrapDraws(BaseModel):
    values: FloatArray
    seed: int
    weight_law: WeightLaw

    model_config = ARRAY_CONFIG

    @property
    def reps(self) -> int:
        return self.values.shape[0]


class TestResult(BaseModel):
    __test__ = False  # not a pytest class

    hypothesis: str
    statistic: float
    critical_value: float
    p_value: float
    reject: bool
    reps: int
    alpha: float
    seed: int
    weight_law: WeightLaw
    rank: int
    null_dim: int
    tau_h: float | None = None


class LocalResult(BaseModel):
    hypothesis: str
    statistic: float
    critical_value: float
    p_value: float
    reject: bool


class MCTestResult(BaseModel):
    local_tests: list[LocalResult]
    beta_hat: float
    reject: bool
    reps: int
    alpha: float
    seed: int
    weight_law: WeightLaw

    @property
    def rejected(self) -> list[str]:
        return [local.hypothesis for local in self.local_tests if local.reject]


class RunConfig(BaseModel):
    """Everything needed to replay a test command."""

    command: Literal["test", "mctest"]
    data: str
    time_col: str = "time"
    status_col: str = "status"
    factors: list[str]
    group_col: str | None = None
    hypotheses: list[str] = []
    contrast_file: str | None = None
    kernel: KernelSpec
    reps: int
    alpha: float
    seed: int
    weight_law: WeightLaw


class ResultDocument(BaseModel):
    version: str
    config: RunConfig
    group_counts: dict[str, int]
    test: TestResult | None = None
    mctest: MCTestResult | None = None


class PowerRow(BaseModel):
    design: str
    censoring: str
    size_multiplier: str
    theta: float
    n_total: int
    kernel: str
    rejection_rate: float
    mc_se: float
    replications: int

    @classmethod
    def from_rejections(cls, rejections: np.ndarray, **fields) -> "PowerRow":
        rate = float(np.mean(rejections))
        replications = int(rejections.shape[0])
        return cls(
            rejection_rate=rate,
            mc_se=float(np.sqrt(rate * (1.0 - rate) / replications)),
            replications=replications,
            **fields,
        )
