"""KPI identities, time-series datasets, and normalization.

A KPI is a metric measured on a node and is keyed by the text form
``metric@node``.  Datasets are dense matrices: one row per timestamp, one
column per KPI, values finite, timestamps strictly increasing.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    DataError,
    DimensionMismatch,
    IoError,
    MalformedKpiId,
    MissingValue,
    SchemaError,
)

TIMESTAMP_COLUMN = "timestamp"


@dataclass(frozen=True, order=True)
class KpiId:
    """Identity of one KPI: a metric name on a node."""

    metric: str
    node: str

    def __post_init__(self) -> None:
        for part, label in ((self.metric, "metric"), (self.node, "node")):
            if not part:
                raise MalformedKpiId(f"empty {label} in KPI id")
            if "@" in part:
                raise MalformedKpiId(f"'@' not allowed inside {label}: {part!r}")

    def __str__(self) -> str:
        return f"{self.metric}@{self.node}"


def parse_kpi_id(text: str) -> KpiId:
    """Parse ``metric@node`` into a :class:`KpiId`.

    Exactly one ``@`` must be present and both sides must be non-empty.
    """
    if text.count("@") != 1:
        raise MalformedKpiId(f"expected exactly one '@' in KPI id: {text!r}")
    metric, node = text.split("@")
    return KpiId(metric=metric, node=node)


def format_kpi_id(kpi: KpiId) -> str:
    """Render a :class:`KpiId` back to its ``metric@node`` text form."""
    return str(kpi)


@dataclass(frozen=True)
class KpiDescriptor:
    """Human-readable description of a KPI, used to phrase questions."""

    kpi: KpiId
    description: str
    unit: str | None = None


@dataclass(eq=False)
class TimeSeriesDataset:
    """Dense multivariate KPI series.

    ``values`` has shape (T, n) aligned with ``kpis``; ``timestamps`` are
    strictly increasing integers (sample indices or epoch seconds).  Treat
    instances as immutable; operations return new datasets.
    """

    timestamps: np.ndarray
    kpis: list[KpiId]
    values: np.ndarray

    def __post_init__(self) -> None:
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if len(self.kpis) < 1:
            raise SchemaError("dataset needs at least one KPI column")
        if self.values.ndim != 2 or self.values.shape[1] != len(self.kpis):
            raise DimensionMismatch(
                f"values shape {self.values.shape} does not match {len(self.kpis)} KPI columns"
            )
        if self.timestamps.shape[0] != self.values.shape[0]:
            raise DimensionMismatch("one timestamp per row required")
        if np.any(np.diff(self.timestamps) <= 0):
            raise SchemaError("timestamps must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise SchemaError("values must be finite")

    @property
    def n_kpis(self) -> int:
        return len(self.kpis)

    @property
    def n_rows(self) -> int:
        return int(self.values.shape[0])

    def column(self, kpi: KpiId) -> np.ndarray:
        return self.values[:, self.kpis.index(kpi)]


def _parse_timestamp(cell: str, row_no: int) -> int:
    text = cell.strip()
    if not text:
        raise MissingValue(f"row {row_no}: empty timestamp cell")
    try:
        return int(text)
    except ValueError as exc:
        raise SchemaError(f"row {row_no}: timestamp {text!r} is not an integer") from exc


def load_dataset(path: str | os.PathLike[str], missing_policy: str = "forward_fill") -> TimeSeriesDataset:
    """Load a KPI dataset from CSV.

    Layout: header ``timestamp,<metric@node>,...``, one row per sample.
    ``missing_policy`` controls empty value cells: ``forward_fill`` copies the
    previous row's value for that column (an empty cell in the first row is
    unrecoverable), ``reject`` refuses any empty cell.
    """
    if missing_policy not in ("forward_fill", "reject"):
        raise ValueError(f"unknown missing_policy: {missing_policy!r}")
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IoError(f"cannot read dataset: {path}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if not header or header[0].strip() != TIMESTAMP_COLUMN:
            raise SchemaError(f"{path}: first header cell must be {TIMESTAMP_COLUMN!r}")
        kpis = [parse_kpi_id(cell.strip()) for cell in header[1:]]
        if not kpis:
            raise SchemaError(f"{path}: no KPI columns")
        if len(set(kpis)) != len(kpis):
            raise SchemaError(f"{path}: duplicate KPI columns")

        timestamps: list[int] = []
        rows: list[list[float]] = []
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(kpis) + 1:
                raise SchemaError(
                    f"{path}: row {row_no} has {len(row)} cells, expected {len(kpis) + 1}"
                )
            timestamps.append(_parse_timestamp(row[0], row_no))
            parsed: list[float] = []
            for col, cell in enumerate(row[1:]):
                text = cell.strip()
                if not text:
                    if missing_policy == "reject" or not rows:
                        raise MissingValue(
                            f"{path}: row {row_no} column {kpis[col]} is empty"
                        )
                    parsed.append(rows[-1][col])
                    continue
                try:
                    value = float(text)
                except ValueError as exc:
                    raise SchemaError(
                        f"{path}: row {row_no} column {kpis[col]}: {text!r} is not a number"
                    ) from exc
                if not math.isfinite(value):
                    raise SchemaError(
                        f"{path}: row {row_no} column {kpis[col]}: non-finite value"
                    )
                parsed.append(value)
            rows.append(parsed)

    values = np.asarray(rows, dtype=np.float64) if rows else np.empty((0, len(kpis)))
    return TimeSeriesDataset(timestamps=np.asarray(timestamps, dtype=np.int64), kpis=kpis, values=values)


def write_dataset(dataset: TimeSeriesDataset, path: str | os.PathLike[str]) -> None:
    """Write a dataset as CSV with 17 significant digits (exact round trip)."""
    try:
        handle = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise IoError(f"cannot write dataset: {path}") from exc
    with handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow([TIMESTAMP_COLUMN, *(str(k) for k in dataset.kpis)])
        for ts, row in zip(dataset.timestamps, dataset.values):
            writer.writerow([int(ts), *(f"{v:.17g}" for v in row)])


@dataclass(eq=False)
class NormalizationStats:
    """Per-column mean and population standard deviation.

    ``std`` is recorded exactly as measured; a zero entry means the column was
    constant and an effective scale of 1.0 is used when (de)normalizing.
    """

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.std = np.asarray(self.std, dtype=np.float64)
        if self.mean.shape != self.std.shape or self.mean.ndim != 1:
            raise DimensionMismatch("mean and std must be 1-D and the same length")
        if np.any(self.std < 0):
            raise DataError("std entries must be non-negative")

    @property
    def effective_std(self) -> np.ndarray:
        return np.where(self.std == 0.0, 1.0, self.std)

    def transform(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        if values.shape[-1] != self.mean.shape[0]:
            raise DimensionMismatch(
                f"expected {self.mean.shape[0]} columns, got {values.shape[-1]}"
            )
        return (values - self.mean) / self.effective_std

    def inverse(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        if values.shape[-1] != self.mean.shape[0]:
            raise DimensionMismatch(
                f"expected {self.mean.shape[0]} columns, got {values.shape[-1]}"
            )
        return values * self.effective_std + self.mean


def fit_normalization(dataset: TimeSeriesDataset) -> NormalizationStats:
    """Compute per-column mean and population std over all rows."""
    if dataset.n_rows < 1:
        raise DataError("cannot fit normalization on an empty dataset")
    return NormalizationStats(
        mean=dataset.values.mean(axis=0),
        std=dataset.values.std(axis=0),  # ddof=0: population std
    )


def apply_normalization(
    dataset: TimeSeriesDataset, stats: NormalizationStats, direction: str = "forward"
) -> TimeSeriesDataset:
    """Return a new dataset with values scaled to or from normalized space."""
    if direction == "forward":
        values = stats.transform(dataset.values)
    elif direction == "inverse":
        values = stats.inverse(dataset.values)
    else:
        raise ValueError(f"unknown direction: {direction!r}")
    return TimeSeriesDataset(timestamps=dataset.timestamps.copy(), kpis=list(dataset.kpis), values=values)


def load_descriptors(path: str | os.PathLike[str]) -> dict[KpiId, KpiDescriptor]:
    """Load a KPI descriptor table from CSV (``kpi,description[,unit]``)."""
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IoError(f"cannot read descriptor table: {path}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = [cell.strip() for cell in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if header[:2] != ["kpi", "description"]:
            raise SchemaError(f"{path}: header must start with kpi,description")
        has_unit = len(header) > 2 and header[2] == "unit"
        table: dict[KpiId, KpiDescriptor] = {}
        for row in reader:
            if not row:
                continue
            kpi = parse_kpi_id(row[0].strip())
            unit = row[2].strip() or None if has_unit and len(row) > 2 else None
            table[kpi] = KpiDescriptor(kpi=kpi, description=row[1].strip(), unit=unit)
    return table
