"""Contrast matrices for factorial hypotheses and their null-space bases."""

import itertools
from typing import Literal

import numpy as np
import scipy.linalg

from survtest.config import get_settings
from survtest.exceptions import HypothesisError
from survtest.models.design import ContrastMatrix, FactorialDesign, NullBasis

HypothesisKind = Literal["main-effect", "effect", "interaction", "dunnett", "tukey"]
HYPOTHESIS_KINDS = ("main-effect", "effect", "interaction", "dunnett", "tukey")


def _cell_name(levels: tuple[int, ...]) -> str:
    return "L" + "".join(str(level) for level in levels)


def _centering(levels: int) -> np.ndarray:
    return np.eye(levels) - np.full((levels, levels), 1.0 / levels)


def _factor_or_raise(design: FactorialDesign, factor: str | None) -> int:
    if factor is None:
        raise HypothesisError("this hypothesis kind needs a factor")
    if factor not in design.factor_names:
        raise HypothesisError(f"unknown factor '{factor}'; design factors are {design.factor_names}")
    position = design.factor_position(factor)
    if design.factor_levels[position] < 2:
        raise HypothesisError(f"factor '{factor}' has a single level")
    return position


def _main_effect(design: FactorialDesign, position: int) -> tuple[np.ndarray, list[str]]:
    # Λ_{1·} − Λ_{i·}, i = 2..L, averaging over every other factor
    tuples = design.level_tuples()
    levels = design.factor_levels[position]
    others = design.k // levels
    rows, labels = [], []
    for i in range(2, levels + 1):
        row = np.zeros(design.k)
        for g, cell in enumerate(tuples):
            if cell[position] == 1:
                row[g] += 1.0 / others
            elif cell[position] == i:
                row[g] -= 1.0 / others
        rows.append(row)
        labels.append(f"{design.factor_names[position]}:1={i}")
    return np.array(rows), labels


def _effect(design: FactorialDesign, position: int) -> tuple[np.ndarray, list[str]]:
    # Λ_{1,rest} − Λ_{i,rest} for every combination of the other factors
    tuples = design.level_tuples()
    levels = design.factor_levels[position]
    rest_ranges = [range(1, count + 1) for p, count in enumerate(design.factor_levels) if p != position]
    rows, labels = [], []
    for rest in itertools.product(*rest_ranges):
        base = rest[:position] + (1,) + rest[position:]
        for i in range(2, levels + 1):
            other = rest[:position] + (i,) + rest[position:]
            row = np.zeros(design.k)
            row[tuples.index(base)] = 1.0
            row[tuples.index(other)] = -1.0
            rows.append(row)
            labels.append(f"{_cell_name(base)}={_cell_name(other)}")
    return np.array(rows), labels


def _interaction(design: FactorialDesign) -> tuple[np.ndarray, list[str]]:
    # one row per cell: Λ_ij − Λ_i· − Λ_·j + Λ_·· (Kronecker product of centering matrices)
    if len(design.factor_levels) < 2 or min(design.factor_levels) < 2:
        raise HypothesisError("an interaction needs at least two factors, each with two or more levels")
    matrix = np.ones((1, 1))
    for levels in design.factor_levels:
        matrix = np.kron(matrix, _centering(levels))
    labels = [f"interaction {_cell_name(cell)}" for cell in design.level_tuples()]
    return matrix, labels


def _dunnett(k: int) -> tuple[np.ndarray, list[str]]:
    rows = np.zeros((k - 1, k))
    rows[:, 0] = -1.0
    rows[np.arange(k - 1), np.arange(1, k)] = 1.0
    return rows, [f"G1=G{j}" for j in range(2, k + 1)]


def _tukey(k: int) -> tuple[np.ndarray, list[str]]:
    pairs = list(itertools.combinations(range(k), 2))
    rows = np.zeros((len(pairs), k))
    for row, (i, j) in enumerate(pairs):
        rows[row, i] = -1.0
        rows[row, j] = 1.0
    return rows, [f"G{i + 1}=G{j + 1}" for i, j in pairs]


def build_hypothesis(design: FactorialDesign, kind: HypothesisKind, factor: str | None = None) -> ContrastMatrix:
    """Contrast matrix C encoding the hypothesis CΛ = 0 on the design's k groups."""
    if kind == "main-effect":
        entries, labels = _main_effect(design, _factor_or_raise(design, factor))
        label = f"main-effect:{factor}"
    elif kind == "effect":
        entries, labels = _effect(design, _factor_or_raise(design, factor))
        label = f"effect:{factor}"
    elif kind == "interaction":
        entries, labels = _interaction(design)
        label = "interaction"
    elif kind == "dunnett":
        entries, labels = _dunnett(design.k)
        label = "dunnett"
    elif kind == "tukey":
        entries, labels = _tukey(design.k)
        label = "tukey"
    else:
        raise HypothesisError(f"unknown hypothesis kind '{kind}'; expected one of {HYPOTHESIS_KINDS}")
    return ContrastMatrix(entries=entries, label=label, row_labels=labels)


def parse_hypothesis(design: FactorialDesign, text: str) -> ContrastMatrix:
    """Build a hypothesis from its CLI name, e.g. 'main-effect:celltype' or 'interaction'."""
    kind, _, factor = text.partition(":")
    if kind not in HYPOTHESIS_KINDS:
        raise HypothesisError(f"unknown hypothesis kind '{kind}'; expected one of {HYPOTHESIS_KINDS}")
    return build_hypothesis(design, kind, factor or None)


def null_space_basis(contrast: ContrastMatrix, rank_tol: float | None = None) -> NullBasis:
    """Orthonormal basis of N(C) from the SVD of C; d = k − rank(C)."""
    if rank_tol is None:
        rank_tol = get_settings().rank_tol
    return NullBasis(columns=scipy.linalg.null_space(contrast.entries, rcond=rank_tol))


def split_rows(contrast: ContrastMatrix) -> list[ContrastMatrix]:
    """One single-row contrast per equation of C, in row order."""
    labels = contrast.row_labels or [f"{contrast.label}[{i + 1}]" for i in range(contrast.r)]
    return [
        ContrastMatrix(entries=contrast.entries[i : i + 1], label=labels[i], row_labels=[labels[i]])
        for i in range(contrast.r)
    ]
