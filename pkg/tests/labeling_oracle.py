"""Brute-force labeling oracle and synthetic event-table builders.

The oracle scans every raw row with no sorting or index structures, so it
shares nothing with the production path (which bisects a sorted time
column). Kept separate so both the unit tests and the acceptance suite
drive the same comparison.
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np

from taskmill import AttributeKind, Dataset, Schema, Task
from taskmill.dataset import Cell
from taskmill.labeling import Cutoff
from taskmill.petel import AggOp, AttrRef, FilterOp

RawRows = list[tuple[int, dict[str, Cell]]]


def make_dataset(schema: Schema, rows: RawRows) -> Dataset:
    ordered = sorted(rows, key=lambda r: r[0])
    columns = {
        attr: tuple(r[1].get(attr) for r in ordered)
        for attr, kind in schema.attributes
        if kind is not AttributeKind.TIME
    }
    return Dataset(schema=schema, times=tuple(t for t, _ in ordered), columns=columns)


def oracle_label(task: Task, rows: RawRows, cutoff: Cutoff) -> float | str | None:
    lo = cutoff.t + task.params.lead
    hi = lo + task.params.window
    kept: list[dict[str, Cell]] = []
    for t, cells in rows:
        if not lo <= t < hi:
            continue
        value = cells.get(task.entity)
        if value is None or str(value) != cutoff.entity_value:
            continue
        f = task.filter
        if f.op is not FilterOp.ALL:
            left = cells.get(f.attribute)
            if left is None:
                continue
            right = f.threshold
            if isinstance(right, AttrRef):
                right = cells.get(right.name)
                if right is None:
                    continue
            if f.op is FilterOp.GREATER and not float(left) > float(right):
                continue
            if f.op is FilterOp.LESS and not float(left) < float(right):
                continue
            if f.op is FilterOp.EQ and str(left) != str(right):
                continue
            if f.op is FilterOp.NEQ and str(left) == str(right):
                continue
        kept.append(cells)

    op = task.agg.op
    if op is AggOp.COUNT:
        return float(len(kept))
    values = [c[task.agg.attribute] for c in kept if c.get(task.agg.attribute) is not None]
    if op is AggOp.SUM:
        return math.fsum(float(v) for v in values)
    if not values:
        return None
    if op is AggOp.AVG:
        return math.fsum(float(v) for v in values) / len(values)
    if op is AggOp.MIN:
        return min(float(v) for v in values)
    if op is AggOp.MAX:
        return max(float(v) for v in values)
    counts = Counter(str(v) for v in values)
    top = max(counts.values())
    return min(label for label, c in counts.items() if c == top)


SYNTH_SCHEMA = Schema(
    "synthetic",
    (
        ("TS", AttributeKind.TIME),
        ("UNIT", AttributeKind.ENTITY),
        ("CAT", AttributeKind.CATEGORICAL),
        ("X", AttributeKind.NUMERICAL),
        ("Y", AttributeKind.NUMERICAL),
    ),
)

_DAY = 86400


def synthetic_rows(n: int = 200, seed: int = 42) -> RawRows:
    """n rows over ~25 days; X always present, Y and CAT sometimes missing."""
    rng = np.random.default_rng(seed)
    units = ["A", "B", "C"]
    cats = ["red", "green", "blue"]
    base = 1_420_070_400  # 2015-01-01
    rows: RawRows = []
    for _ in range(n):
        t = base + int(rng.integers(0, 25)) * _DAY + int(rng.integers(0, 24)) * 3600
        cells: dict[str, Cell] = {
            "UNIT": units[int(rng.integers(0, 3))],
            "CAT": None if rng.random() < 0.15 else cats[int(rng.integers(0, 3))],
            "X": round(float(rng.normal(50.0, 20.0)), 1),
            "Y": None if rng.random() < 0.2 else round(float(rng.uniform(0, 10)), 2),
        }
        rows.append((t, cells))
    return rows
