from typing import Literal

import numpy as np
from pydantic import BaseModel, PositiveFloat, PositiveInt, model_validator

from survtest.models.design import FactorialDesign

Regime = Literal["low", "medium", "high"]

# unbalanced group-size proportions, keyed by (level of I, level of J)
UNBALANCED_AB = {(1, 1): 15, (2, 1): 9, (1, 2): 5, (2, 2): 9, (1, 3): 7, (2, 3): 6}
UNBALANCED_C = {
    (1, 1): 15, (2, 1): 9, (3, 1): 5,
    (1, 2): 9, (2, 2): 7, (3, 2): 6,
    (1, 3): 8, (2, 3): 5, (3, 3): 11,
}


class HazardSpec(BaseModel):
    """Closed-form cumulative hazard of one group (survival or censoring time)."""

    family: Literal["constant", "cos2", "sin2", "data_c", "weibull"]
    rate: PositiveFloat = 1.0
    shape: PositiveFloat = 1.0
    theta: float = 0.0
    cell: tuple[int, int] = (1, 1)
    tag: str = ""

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check(self) -> "HazardSpec":
        if self.family == "data_c":
            if self.theta < -1:
                raise ValueError("theta must be at least -1")
            if not all(1 <= level <= 3 for level in self.cell):
                raise ValueError("data C cells have levels in 1..3")
        return self


class CensoringSpec(BaseModel):
    regime: Regime
    hazards: list[HazardSpec]

    model_config = {"frozen": True}


class ScenarioConfig(BaseModel):
    """One simulated design; exactly one of `balanced` (n per group) or `multiplier` is set."""

    design: Literal["A", "B", "C"]
    theta: float = 0.0
    censoring: Regime = "low"
    balanced: PositiveInt | None = None
    multiplier: float | None = None
    replications: PositiveInt = 1000
    seed: int = 0

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check(self) -> "ScenarioConfig":
        if (self.balanced is None) == (self.multiplier is None):
            raise ValueError("set exactly one of balanced or multiplier")
        if self.multiplier is not None and self.multiplier < 1:
            raise ValueError("the unbalanced multiplier must be at least 1")
        if self.design == "C" and self.theta < -1:
            raise ValueError("theta must be at least -1")
        return self

    def factorial_design(self) -> FactorialDesign:
        levels = [3, 3] if self.design == "C" else [2, 3]
        return FactorialDesign(factor_names=["I", "J"], factor_levels=levels)

    def group_sizes(self) -> np.ndarray:
        cells = self.factorial_design().level_tuples()
        if self.balanced is not None:
            return np.full(len(cells), self.balanced, dtype=np.int64)
        proportions = UNBALANCED_C if self.design == "C" else UNBALANCED_AB
        return np.array([max(int(np.floor(proportions[cell] * self.multiplier)), 1) for cell in cells])

    @property
    def size_label(self) -> str:
        if self.balanced is not None:
            return f"balanced:{self.balanced}"
        return f"unbalanced:{self.multiplier:g}"
