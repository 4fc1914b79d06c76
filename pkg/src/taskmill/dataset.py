"""Immutable event tables: loading, per-attribute statistics, validation.

Timestamps are normalized to integer epoch seconds at load time (the file's
naive timestamps are read as UTC). Rows are kept sorted ascending by time;
rows with equal timestamps keep file order. Missing cells stay explicit
(`None`), never imputed.
"""

from __future__ import annotations

import calendar
import csv
import hashlib
import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterator, Mapping

from .errors import EmptyDataset, MissingColumn, NoTimeColumn, UnknownAttribute
from .schema import AttributeKind, Schema, canonical_name

Cell = float | str | None


def nearest_rank_quantile(values: list[float], p: float) -> float:
    """Quantile by nearest rank on the sorted values.

    Uses 1-based rank floor(p*n)+1, clamped to n, so q50 of [0, 5, 10, 30]
    is 10. Deterministic across platforms; no interpolation.
    """
    if not values:
        raise ValueError("no values")
    ordered = sorted(values)
    n = len(ordered)
    return ordered[min(int(p * n), n - 1)]


@dataclass(frozen=True)
class LoadReport:
    rows_loaded: int
    rows_dropped: int


@dataclass(frozen=True)
class AttributeStats:
    """Summary of one attribute's present values."""

    attribute: str
    count_present: int
    count_missing: int
    minimum: float | None = None
    maximum: float | None = None
    q25: float | None = None
    q50: float | None = None
    q75: float | None = None
    frequencies: Mapping[str, int] | None = None


@dataclass(frozen=True)
class ValidationReport:
    row_count: int
    time_span_seconds: int
    missing_rates: Mapping[str, float]


@dataclass(frozen=True)
class Dataset:
    """Loaded event table, immutable after construction.

    `times` holds sorted epoch seconds; `columns` maps every non-time
    attribute to its cells, aligned with `times`.
    """

    schema: Schema
    times: tuple[int, ...]
    columns: Mapping[str, tuple[Cell, ...]]
    load_report: LoadReport = LoadReport(0, 0)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def min_time(self) -> int:
        return self.times[0]

    @property
    def max_time(self) -> int:
        return self.times[-1]

    def column(self, attribute: str) -> tuple[Cell, ...]:
        name = canonical_name(attribute)
        if name == self.schema.time_attribute:
            return tuple(float(t) for t in self.times)
        if name not in self.columns:
            raise UnknownAttribute(attribute)
        return self.columns[name]

    def rows(self) -> Iterator[tuple[int, dict[str, Cell]]]:
        names = list(self.columns)
        for i, t in enumerate(self.times):
            yield t, {n: self.columns[n][i] for n in names}

    def to_jsonable(self) -> dict:
        return {
            "schema": self.schema.to_sidecar(),
            "times": list(self.times),
            "columns": {n: list(c) for n, c in sorted(self.columns.items())},
        }

    def fingerprint(self) -> str:
        payload = json.dumps(self.to_jsonable(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()


def _parse_time(value: str, fmt: str) -> int | None:
    try:
        dt = datetime.strptime(value.strip(), fmt)
    except ValueError:
        return None
    return calendar.timegm(dt.timetuple())


def load_dataset(table_path: str | Path, schema: Schema) -> Dataset:
    """Load a CSV event table under a declared schema.

    Every declared attribute must appear as a column header (matched
    case-insensitively). Rows whose time cell does not parse under the
    schema's time format are dropped and counted in the load report.
    """
    path = Path(table_path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"empty file: {path}") from None
        raw_rows = [r for r in reader if any(cell.strip() for cell in r)]

    index_by_name = {canonical_name(h): i for i, h in enumerate(header)}
    time_attr = schema.time_attribute
    if time_attr not in index_by_name:
        raise NoTimeColumn(time_attr)
    for attr, _kind in schema.attributes:
        if attr not in index_by_name:
            raise MissingColumn(attr)

    def cell(row: list[str], attr: str) -> str:
        i = index_by_name[attr]
        return row[i].strip() if i < len(row) else ""

    parsed: list[tuple[int, list[str]]] = []
    dropped = 0
    for row in raw_rows:
        t = _parse_time(cell(row, time_attr), schema.time_format)
        if t is None:
            dropped += 1
            continue
        parsed.append((t, row))
    if not parsed:
        raise EmptyDataset(f"no rows with parseable time in {path}")

    # stable sort keeps file order for equal timestamps
    parsed.sort(key=lambda item: item[0])

    columns: dict[str, tuple[Cell, ...]] = {}
    for attr, kind in schema.attributes:
        if kind is AttributeKind.TIME:
            continue
        cells: list[Cell] = []
        for _t, row in parsed:
            raw = cell(row, attr)
            if not raw:
                cells.append(None)
            elif kind is AttributeKind.NUMERICAL:
                try:
                    cells.append(float(raw))
                except ValueError:
                    cells.append(None)
            else:
                cells.append(raw)
        columns[attr] = tuple(cells)

    return Dataset(
        schema=schema,
        times=tuple(t for t, _ in parsed),
        columns=columns,
        load_report=LoadReport(rows_loaded=len(parsed), rows_dropped=dropped),
    )


def compute_stats(dataset: Dataset, attribute: str) -> AttributeStats:
    """Per-attribute statistics used for thresholds and sufficiency checks."""
    name = canonical_name(attribute)
    kind = dataset.schema.kind_of(name)
    if kind is None:
        raise UnknownAttribute(attribute)
    cells = dataset.column(name)
    present = [c for c in cells if c is not None]
    missing = len(cells) - len(present)

    if kind in (AttributeKind.NUMERICAL, AttributeKind.TIME):
        numbers = [float(c) for c in present]
        if not numbers:
            return AttributeStats(name, 0, missing)
        return AttributeStats(
            attribute=name,
            count_present=len(numbers),
            count_missing=missing,
            minimum=min(numbers),
            maximum=max(numbers),
            q25=nearest_rank_quantile(numbers, 0.25),
            q50=nearest_rank_quantile(numbers, 0.50),
            q75=nearest_rank_quantile(numbers, 0.75),
        )

    freqs: dict[str, int] = {}
    for c in present:
        freqs[str(c)] = freqs.get(str(c), 0) + 1
    return AttributeStats(
        attribute=name,
        count_present=len(present),
        count_missing=missing,
        frequencies=freqs,
    )


def validate_dataset(dataset: Dataset) -> ValidationReport:
    """Report-only health summary; never mutates or raises."""
    total = len(dataset)
    rates = {}
    for attr, kind in dataset.schema.attributes:
        if kind is AttributeKind.TIME:
            continue
        cells = dataset.columns[attr]
        rates[attr] = sum(1 for c in cells if c is None) / total if total else 0.0
    return ValidationReport(
        row_count=total,
        time_span_seconds=dataset.max_time - dataset.min_time,
        missing_rates=rates,
    )
