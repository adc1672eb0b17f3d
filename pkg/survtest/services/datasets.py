"""Reading and writing survival datasets and contrast files."""

import logging
from importlib import resources
from pathlib import Path

import numpy as np
import pandas as pd

from survtest.exceptions import SchemaError
from survtest.models.design import ContrastMatrix, FactorialDesign
from survtest.models.sample import SurvivalSample

logger = logging.getLogger(__name__)

VETERAN = "veteran"


def veteran_path() -> Path:
    """Bundled veteran lung-cancer trial data (treatment x cell type, 137 patients)."""
    return Path(str(resources.files("survtest") / "data" / "veteran.csv"))


def resolve_data_path(data: str) -> Path:
    if data == VETERAN:
        return veteran_path()
    return Path(data)


def _line(position) -> int:
    # header is line 1
    return int(position) + 2


def _read_table(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise SchemaError(f"dataset not found: {path}")
    try:
        sep = "\t" if path.suffix in (".tsv", ".tab") else ","
        return pd.read_csv(path, sep=sep, skipinitialspace=True, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise SchemaError(f"cannot parse {path}: {e}") from e


def _require_columns(frame: pd.DataFrame, columns: list[str], path: Path) -> None:
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {missing}; found {list(frame.columns)}")


def _integer_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    values = pd.to_numeric(frame[column], errors="coerce").to_numpy(dtype=float)
    bad = np.flatnonzero(~np.isfinite(values) | (values != np.round(values)))
    if bad.size:
        raise SchemaError(f"column '{column}' needs integers; bad value on line(s) {[_line(i) for i in bad[:10]]}")
    return values.astype(np.int64)


def _levels(frame: pd.DataFrame, column: str) -> tuple[np.ndarray, int]:
    values = _integer_column(frame, column)
    below = np.flatnonzero(values < 1)
    if below.size:
        raise SchemaError(f"column '{column}': levels start at 1; line(s) {[_line(i) for i in below[:10]]}")
    count = int(values.max())
    missing = sorted(set(range(1, count + 1)) - set(values.tolist()))
    if missing:
        raise SchemaError(f"column '{column}': level gap, levels {missing} of 1..{count} never occur")
    return values, count


def load_dataset(
    path: str | Path,
    time_col: str = "time",
    status_col: str = "status",
    factors: list[str] | None = None,
    group_col: str | None = None,
) -> tuple[SurvivalSample, FactorialDesign]:
    """Parse a delimited file into a sample whose groups run lexicographically over the factor columns.

    Without factor columns a precomputed group column defines a one-way design.
    """
    path = Path(path)
    factors = list(factors or [])
    if not factors and group_col is None:
        raise SchemaError("name at least one factor column or a group column")
    frame = _read_table(path)
    _require_columns(frame, [time_col, status_col, *factors] + ([group_col] if group_col else []), path)
    if frame.empty:
        raise SchemaError(f"{path}: no data rows")

    times = pd.to_numeric(frame[time_col], errors="coerce").to_numpy(dtype=float)
    bad_times = np.flatnonzero(~np.isfinite(times) | (times <= 0))
    if bad_times.size:
        raise SchemaError(f"nonpositive or missing time on line(s) {[_line(i) for i in bad_times[:10]]}")

    status = pd.to_numeric(frame[status_col], errors="coerce").to_numpy(dtype=float)
    bad_status = np.flatnonzero(~np.isin(status, (0.0, 1.0)))
    if bad_status.size:
        raise SchemaError(f"status must be 0 or 1; bad value on line(s) {[_line(i) for i in bad_status[:10]]}")

    if factors:
        columns = [_levels(frame, factor) for factor in factors]
        design = FactorialDesign(factor_names=factors, factor_levels=[count for _, count in columns])
        groups = np.array([design.group_index(tuple(int(c[row]) for c, _ in columns)) for row in range(len(frame))])
        if group_col is not None:
            given = _integer_column(frame, group_col)
            clash = np.flatnonzero(given != groups)
            if clash.size:
                raise SchemaError(
                    f"column '{group_col}' disagrees with the factor levels on line(s) {[_line(i) for i in clash[:10]]}"
                )
    else:
        groups, count = _levels(frame, group_col)
        if count < 2:
            raise SchemaError(f"column '{group_col}' has a single group")
        design = FactorialDesign.one_way(count, name=group_col)

    sample = SurvivalSample(times=times, status=status.astype(np.int64), groups=groups, k=design.k)
    logger.info("loaded %s: n=%d, events=%d", path.name, sample.n, sample.n_events)
    logger.info("group counts: %s", group_counts(sample, design))
    return sample, design


def group_counts(sample: SurvivalSample, design: FactorialDesign) -> dict[str, int]:
    return {design.group_label(group): int(count) for group, count in enumerate(sample.group_counts(), start=1)}


def write_dataset(sample: SurvivalSample, design: FactorialDesign, path: str | Path) -> Path:
    """Write a sample in the layout load_dataset reads back: time, status, one column per factor, group."""
    if design.k != sample.k:
        raise ValueError(f"design has k={design.k} but the sample has k={sample.k}")
    path = Path(path)
    tuples = design.level_tuples()
    frame = pd.DataFrame({"time": sample.times, "status": sample.status})
    for position, name in enumerate(design.factor_names):
        frame[name] = [tuples[group - 1][position] for group in sample.groups]
    frame["group"] = sample.groups
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def read_contrast_file(path: str | Path, k: int) -> ContrastMatrix:
    """Contrast matrix from a headerless CSV, one row per equation; '#' starts a comment."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"contrast file not found: {path}")
    try:
        frame = pd.read_csv(path, header=None, comment="#", skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise SchemaError(f"cannot parse contrast file {path}: {e}") from e
    entries = frame.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    if entries.shape[1] != k:
        raise SchemaError(f"contrast file {path} has {entries.shape[1]} columns, the design has k={k}")
    bad = np.flatnonzero(~np.all(np.isfinite(entries), axis=1))
    if bad.size:
        raise SchemaError(f"contrast file {path}: non-numeric entry in row(s) {[int(i) + 1 for i in bad]}")
    try:
        return ContrastMatrix(entries=entries, label=path.stem)
    except ValueError as e:
        raise SchemaError(f"contrast file {path}: {e}") from e
