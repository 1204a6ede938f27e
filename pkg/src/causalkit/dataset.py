"""Immutable columnar tables: CSV ingestion and the transforms the
estimators rely on (mean-threshold binarization, standardization,
text histograms)."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AllRowsDroppedError,
    DuplicateHeaderError,
    EmptyColumnError,
    EmptyFileError,
    NameCollisionError,
    UnknownColumnError,
)

HISTOGRAM_BAR_WIDTH = 50


class Table:
    """An ordered collection of equal-length float64 columns.

    Tables never contain NaN or infinities and are immutable: every
    transform returns a new table. Column arrays are exposed as read-only
    views, so sharing across threads is safe.
    """

    __slots__ = ("_names", "_cols", "n_rows")

    def __init__(self, columns: Iterable[tuple[str, Sequence[float]]]):
        names: list[str] = []
        cols: dict[str, np.ndarray] = {}
        n_rows: int | None = None
        for name, values in columns:
            if not name:
                raise UnknownColumnError("column names must be non-empty")
            if name in cols:
                raise DuplicateHeaderError(f"duplicate column name: {name!r}")
            arr = np.asarray(values, dtype=np.float64).copy()
            if arr.ndim != 1:
                raise ValueError(f"column {name!r} is not one-dimensional")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"column {name!r} contains NaN or infinite values")
            if n_rows is None:
                n_rows = arr.shape[0]
            elif arr.shape[0] != n_rows:
                raise ValueError(f"column {name!r} has {arr.shape[0]} rows, expected {n_rows}")
            arr.flags.writeable = False
            names.append(name)
            cols[name] = arr
        self._names = tuple(names)
        self._cols = cols
        self.n_rows = 0 if n_rows is None else int(n_rows)

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    def __contains__(self, name: str) -> bool:
        return name in self._cols

    def column(self, name: str) -> np.ndarray:
        try:
            return self._cols[name]
        except KeyError:
            raise UnknownColumnError(f"unknown column: {name!r}") from None

    def items(self) -> list[tuple[str, np.ndarray]]:
        return [(name, self._cols[name]) for name in self._names]

    def with_column(self, name: str, values: Sequence[float]) -> "Table":
        """New table with an extra column appended."""
        if name in self._cols:
            raise NameCollisionError(f"column already exists: {name!r}")
        return Table(self.items() + [(name, values)])

    def replace_column(self, name: str, values: Sequence[float]) -> "Table":
        """New table with one column's values swapped out."""
        self.column(name)
        return Table(
            [(n, values if n == name else v) for n, v in self.items()]
        )

    def take(self, row_indices: Sequence[int]) -> "Table":
        """New table containing the given rows, in the given order."""
        idx = np.asarray(row_indices, dtype=np.intp)
        return Table([(n, v[idx]) for n, v in self.items()])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self._names)
            arrays = [self._cols[n] for n in self._names]
            for i in range(self.n_rows):
                writer.writerow([repr(float(a[i])) for a in arrays])

    def __repr__(self) -> str:
        return f"Table({self.n_rows} rows, {len(self._names)} columns)"


class EstimatorKind(str, enum.Enum):
    PROPENSITY_SCORE_MATCHING = "propensity_score_matching"
    DISTANCE_MATCHING = "distance_matching"
    STRATIFICATION = "stratification"
    LINEAR_REGRESSION = "linear_regression"


@dataclass(frozen=True)
class AnalysisSpec:
    """What to estimate: treatment/outcome columns, confounders, method, seed."""

    treatment: str
    outcome: str
    confounders: list[str] = field(default_factory=list)
    estimator: EstimatorKind = EstimatorKind.PROPENSITY_SCORE_MATCHING
    seed: int = 42

    def __post_init__(self) -> None:
        names = [self.treatment, self.outcome, *self.confounders]
        if len(set(names)) != len(names):
            raise UnknownColumnError(
                "treatment, outcome and confounders must be distinct column names"
            )


def load_csv(path) -> tuple[Table, int]:
    """Load a numeric CSV (header row required).

    Any row containing a missing, non-numeric, or non-finite cell is
    dropped; the second return value counts the dropped rows. Raises
    EmptyFileError when there is no header, DuplicateHeaderError on
    repeated column names, and AllRowsDroppedError when no usable data
    rows remain. File-system failures propagate as OSError.
    """
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFileError(f"no header line in {path}") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise DuplicateHeaderError(f"repeated column names in {path}")
        n_cols = len(header)

        rows: list[list[float]] = []
        dropped = 0
        for raw in reader:
            if len(raw) != n_cols:
                dropped += 1
                continue
            parsed = []
            for cell in raw:
                try:
                    value = float(cell.strip())
                except ValueError:
                    break
                if not math.isfinite(value):
                    break
                parsed.append(value)
            if len(parsed) == n_cols:
                rows.append(parsed)
            else:
                dropped += 1

    if not rows:
        raise AllRowsDroppedError(
            f"{path}: no usable data rows ({dropped} dropped)"
        )
    data = np.array(rows, dtype=np.float64)
    table = Table((name, data[:, j]) for j, name in enumerate(header))
    return table, dropped


def binarize_by_mean(t: Table, column: str, new_name: str) -> Table:
    """Append an indicator that is 1 where the column exceeds its mean.

    Strictly greater: values equal to the mean map to 0. The source column
    is kept.
    """
    values = t.column(column)
    if values.size == 0:
        raise EmptyColumnError(f"cannot binarize empty column {column!r}")
    mean = float(values.mean())
    return t.with_column(new_name, (values > mean).astype(np.float64))


def standardize_columns(t: Table, columns: Sequence[str]) -> Table:
    """Replace each listed column with (x - mean) / std (population std).

    Zero-variance columns become all zeros.
    """
    replaced = {}
    for name in columns:
        values = t.column(name)
        if values.size == 0:
            replaced[name] = values
            continue
        std = float(values.std())  # divisor n
        if std == 0.0:
            replaced[name] = np.zeros_like(values)
        else:
            replaced[name] = (values - values.mean()) / std
    return Table(
        [(n, replaced.get(n, v)) for n, v in t.items()]
    )


def text_histogram(t: Table, column: str, bins: int) -> str:
    """Render equal-width bin counts as text.

    One line per bin: ``[lo, hi) : count : bar`` with the bar scaled so the
    fullest bin spans HISTOGRAM_BAR_WIDTH characters. The final bin is
    closed on the right.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    values = t.column(column)
    if values.size == 0:
        raise EmptyColumnError(f"column {column!r} has no values")
    lo = float(values.min())
    hi = float(values.max())
    width = (hi - lo) / bins

    if width == 0.0:
        idx = np.full(values.shape, bins - 1)
    else:
        idx = np.minimum(((values - lo) / width).astype(np.intp), bins - 1)
        idx[values == hi] = bins - 1
    counts = np.bincount(idx, minlength=bins)

    peak = int(counts.max())
    lines = []
    for b, count in enumerate(counts):
        left = lo + b * width
        right = hi if b == bins - 1 else lo + (b + 1) * width
        bracket = "]" if b == bins - 1 else ")"
        bar = "#" * int(round(HISTOGRAM_BAR_WIDTH * count / peak)) if peak else ""
        lines.append(f"[{left!r}, {right!r}{bracket} : {count} : {bar}")
    return "\n".join(lines) + "\n"
