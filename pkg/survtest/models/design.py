import itertools

import numpy as np
from pydantic import BaseModel, model_validator

from survtest.models.common import ARRAY_CONFIG, FloatArray


class FactorialDesign(BaseModel):
    """Crossed factors; groups are numbered 1..k lexicographically over level tuples."""

    factor_names: list[str]
    factor_levels: list[int]

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check(self) -> "FactorialDesign":
        if len(self.factor_names) != len(self.factor_levels):
            raise ValueError("factor_names and factor_levels must have the same length")
        if len(set(self.factor_names)) != len(self.factor_names):
            raise ValueError("factor names must be unique")
        if any(levels < 1 for levels in self.factor_levels):
            raise ValueError("every factor needs at least one level")
        if self.k < 2:
            raise ValueError("a design needs at least two groups")
        return self

    @classmethod
    def one_way(cls, k: int, name: str = "group") -> "FactorialDesign":
        return cls(factor_names=[name], factor_levels=[k])

    @property
    def k(self) -> int:
        return int(np.prod(self.factor_levels))

    def level_tuples(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(1, levels + 1) for levels in self.factor_levels)))

    def group_index(self, levels: tuple[int, ...]) -> int:
        """1-based group number of a level tuple."""
        if len(levels) != len(self.factor_levels):
            raise ValueError(f"expected {len(self.factor_levels)} levels, got {len(levels)}")
        index = 0
        for level, count in zip(levels, self.factor_levels):
            if not 1 <= level <= count:
                raise ValueError(f"level {level} outside 1..{count}")
            index = index * count + (level - 1)
        return index + 1

    def group_label(self, group: int) -> str:
        return "".join(str(level) for level in self.level_tuples()[group - 1])

    def factor_position(self, name: str) -> int:
        return self.factor_names.index(name)


class ContrastMatrix(BaseModel):
    entries: FloatArray
    label: str = ""
    row_labels: list[str] = []

    model_config = ARRAY_CONFIG

    @model_validator(mode="after")
    def _check(self) -> "ContrastMatrix":
        c = self.entries
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 2:
            raise ValueError(f"contrast matrix must be r x k with r >= 1, k >= 2; got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("contrast matrix has non-finite entries")
        scale = np.abs(c).max(axis=1)
        if np.any(scale == 0):
            raise ValueError("contrast matrix has an all-zero row")
        if np.any(np.abs(c.sum(axis=1)) > 1e-9 * scale * c.shape[1]):
            raise ValueError("every row of a contrast matrix must sum to zero")
        if self.row_labels and len(self.row_labels) != c.shape[0]:
            raise ValueError("row_labels must have one entry per row")
        return self

    @property
    def r(self) -> int:
        return self.entries.shape[0]

    @property
    def k(self) -> int:
        return self.entries.shape[1]


class NullBasis(BaseModel):
    """Columns spanning the null space of a contrast matrix (k x d)."""

    columns: FloatArray

    model_config = ARRAY_CONFIG

    @property
    def k(self) -> int:
        return self.columns.shape[0]

    @property
    def d(self) -> int:
        return self.columns.shape[1]
