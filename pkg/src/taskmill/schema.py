"""Attribute kinds, table schemas, and first-contact schema inference.

A schema declares one time column plus entity, categorical, and numerical
attributes over a CSV event table. Attribute names are canonicalized to
upper case; matching against CSV headers is case-insensitive.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Iterable

from .errors import EmptyDataset


class AttributeKind(Enum):
    TIME = "time"
    ENTITY = "entity"
    CATEGORICAL = "categorical"
    NUMERICAL = "numerical"


# strptime patterns tried, in order, when inferring the time column
_TIME_FORMATS = (
    "%Y-%m-%d",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M:%S",
    "%Y/%m/%d",
    "%m/%d/%Y",
)


def canonical_name(name: str) -> str:
    return name.strip().upper()


@dataclass(frozen=True)
class Schema:
    """Declared attribute kinds for one event table."""

    name: str
    attributes: tuple[tuple[str, AttributeKind], ...]
    time_format: str = "%Y-%m-%d"

    def __post_init__(self) -> None:
        canon = tuple((canonical_name(n), k) for n, k in self.attributes)
        object.__setattr__(self, "attributes", canon)
        names = [n for n, _ in canon]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate attribute names in schema {self.name!r}")
        times = [n for n, k in canon if k is AttributeKind.TIME]
        if len(times) != 1:
            raise ValueError(
                f"schema {self.name!r} must declare exactly one time attribute, got {len(times)}"
            )

    @property
    def time_attribute(self) -> str:
        return next(n for n, k in self.attributes if k is AttributeKind.TIME)

    def kind_of(self, name: str) -> AttributeKind | None:
        target = canonical_name(name)
        for n, k in self.attributes:
            if n == target:
                return k
        return None

    def names_of(self, *kinds: AttributeKind) -> tuple[str, ...]:
        return tuple(n for n, k in self.attributes if k in kinds)

    @property
    def entities(self) -> tuple[str, ...]:
        return self.names_of(AttributeKind.ENTITY)

    @property
    def categoricals(self) -> tuple[str, ...]:
        return self.names_of(AttributeKind.CATEGORICAL)

    @property
    def numericals(self) -> tuple[str, ...]:
        return self.names_of(AttributeKind.NUMERICAL)

    # --- sidecar (de)serialization -------------------------------------

    @classmethod
    def from_sidecar(cls, doc: dict) -> "Schema":
        """Build a schema from the JSON sidecar layout.

        Expected keys: name, time {column, format}, entities, categorical,
        numerical.
        """
        time_decl = doc["time"]
        attrs: list[tuple[str, AttributeKind]] = [
            (time_decl["column"], AttributeKind.TIME)
        ]
        attrs += [(n, AttributeKind.ENTITY) for n in doc.get("entities", [])]
        attrs += [(n, AttributeKind.CATEGORICAL) for n in doc.get("categorical", [])]
        attrs += [(n, AttributeKind.NUMERICAL) for n in doc.get("numerical", [])]
        return cls(
            name=doc.get("name", "unnamed"),
            attributes=tuple(attrs),
            time_format=time_decl.get("format", "%Y-%m-%d"),
        )

    @classmethod
    def load(cls, path: str | Path) -> "Schema":
        with open(path, encoding="utf-8") as fh:
            return cls.from_sidecar(json.load(fh))

    def to_sidecar(self) -> dict:
        return {
            "name": self.name,
            "time": {"column": self.time_attribute, "format": self.time_format},
            "entities": list(self.entities),
            "categorical": list(self.categoricals),
            "numerical": list(self.numericals),
        }


def _parses_as(fmt: str, value: str) -> bool:
    try:
        datetime.strptime(value, fmt)
        return True
    except ValueError:
        return False


def _matching_time_format(values: Iterable[str]) -> str | None:
    sample = [v for v in values if v][:50]
    if not sample:
        return None
    for fmt in _TIME_FORMATS:
        if all(_parses_as(fmt, v) for v in sample):
            return fmt
    return None


def _all_numeric(values: Iterable[str]) -> bool:
    seen = False
    for v in values:
        if not v:
            continue
        seen = True
        try:
            float(v)
        except ValueError:
            return False
    return seen


def infer_schema(table_path: str | Path, name: str | None = None) -> Schema:
    """Guess attribute kinds from a CSV table.

    The heuristic is advisory only; a user-supplied sidecar always wins.
    The first column whose values parse as timestamps becomes the time
    column; numeric-parseable columns become numerical; the rest are
    categorical when their distinct ratio is at most 0.5, entity otherwise.
    """
    path = Path(table_path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"no header row in {path}") from None
        rows = [r for r in reader if any(cell.strip() for cell in r)]
    if not rows:
        raise EmptyDataset(f"no data rows in {path}")

    columns = {h: [r[i].strip() if i < len(r) else "" for r in rows] for i, h in enumerate(header)}
    attrs: list[tuple[str, AttributeKind]] = []
    time_format = "%Y-%m-%d"
    time_found = False
    for col, values in columns.items():
        fmt = None if time_found else _matching_time_format(values)
        if fmt is not None:
            attrs.append((col, AttributeKind.TIME))
            time_format = fmt
            time_found = True
            continue
        if _all_numeric(values):
            attrs.append((col, AttributeKind.NUMERICAL))
            continue
        present = [v for v in values if v]
        distinct_ratio = len(set(present)) / len(present) if present else 1.0
        if distinct_ratio <= 0.5:
            attrs.append((col, AttributeKind.CATEGORICAL))
        else:
            attrs.append((col, AttributeKind.ENTITY))
    return Schema(name=name or path.stem, attributes=tuple(attrs), time_format=time_format)
