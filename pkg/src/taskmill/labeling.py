"""Turning a concrete task into labeled training examples.

Each entity's timeline is segmented into tumbling cutoffs one prediction
window apart, aligned to the dataset's first timestamp truncated to window
granularity. The label at a cutoff t is the task's filter+aggregate over
that entity's rows in [t+lead, t+lead+window); features may only look at
[t-history, t). Labels that are undefined (order statistics of an empty
set) are skipped and counted, while counts and sums of nothing are zero.
"""

from __future__ import annotations

import csv
import json
import math
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .dataset import Cell, Dataset
from .errors import EmptyTrainingSet, UnresolvedThreshold, WindowExceedsSpan
from .petel import AggOp, AttrRef, FilterExpr, FilterOp, Task

Label = float | str | None


@dataclass(frozen=True)
class Cutoff:
    entity_value: str
    t: int


@dataclass(frozen=True)
class LabeledExample:
    cutoff: Cutoff
    label: float | str
    label_window: tuple[int, int]
    feature_window: tuple[int, int]


@dataclass(frozen=True)
class TrainingSet:
    task: Task
    examples: tuple[LabeledExample, ...]
    label_type: str  # "numeric" | "categorical"
    skipped: int


@dataclass(frozen=True)
class SufficiencyReport:
    n_examples: int
    n_per_class: Mapping[str, int] | None
    score: float
    estimated: bool = False


def generate_cutoffs(dataset: Dataset, task: Task) -> list[Cutoff]:
    """Tumbling cutoff grid per distinct entity value.

    Cutoffs step by one window from the aligned origin; a cutoff is kept
    while its label window starts no later than the last event.
    """
    window, lead = task.params.window, task.params.lead
    span = dataset.max_time - dataset.min_time
    if span < lead + window:
        raise WindowExceedsSpan(
            f"data spans {span}s, need at least lead+window = {lead + window}s"
        )
    origin = (dataset.min_time // window) * window
    grid = list(range(origin, dataset.max_time - lead + 1, window))
    values = sorted({v for v in dataset.column(task.entity) if v is not None})
    return [Cutoff(str(v), t) for v in values for t in grid]


def _passes(filt: FilterExpr, row: dict[str, Cell]) -> bool:
    if filt.op is FilterOp.ALL:
        return True
    value = row.get(filt.attribute)
    if value is None:
        return False
    threshold = filt.threshold
    if threshold is None:
        raise UnresolvedThreshold(filt.attribute)
    if isinstance(threshold, AttrRef):
        other = row.get(threshold.name)
        if other is None:
            return False
        threshold = other
    if filt.op is FilterOp.GREATER:
        return float(value) > float(threshold)
    if filt.op is FilterOp.LESS:
        return float(value) < float(threshold)
    if filt.op is FilterOp.EQ:
        return str(value) == str(threshold)
    return str(value) != str(threshold)


def _aggregate(op: AggOp, attribute: str | None, rows: list[dict[str, Cell]]) -> Label:
    if op is AggOp.COUNT:
        return float(len(rows))
    values = [r[attribute] for r in rows if r.get(attribute) is not None]
    # fsum: exactly-rounded, so the result is independent of row order
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
    # majority; ties go to the lexicographically smallest literal
    counts: dict[str, int] = {}
    for v in values:
        counts[str(v)] = counts.get(str(v), 0) + 1
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]


def window_rows(dataset: Dataset, entity: str, value: str, lo: int, hi: int) -> list[dict[str, Cell]]:
    """Rows of one entity with time in [lo, hi), via bisection on the sorted times."""
    start = bisect_left(dataset.times, lo)
    end = bisect_left(dataset.times, hi)
    entity_col = dataset.columns[entity]
    names = list(dataset.columns)
    out = []
    for i in range(start, end):
        if entity_col[i] is not None and str(entity_col[i]) == value:
            out.append({n: dataset.columns[n][i] for n in names})
    return out


def compute_label(task: Task, dataset: Dataset, cutoff: Cutoff) -> Label:
    """Label at one cutoff, or None when the aggregate is undefined."""
    if not task.filter.resolved:
        raise UnresolvedThreshold(task.filter.attribute or "")
    lo = cutoff.t + task.params.lead
    hi = lo + task.params.window
    rows = window_rows(dataset, task.entity, cutoff.entity_value, lo, hi)
    kept = [r for r in rows if _passes(task.filter, r)]
    return _aggregate(task.agg.op, task.agg.attribute, kept)


def build_training_set(task: Task, dataset: Dataset) -> TrainingSet:
    """One labeled example per cutoff with a defined label, ordered by (entity, t)."""
    examples: list[LabeledExample] = []
    skipped = 0
    for cutoff in sorted(generate_cutoffs(dataset, task), key=lambda c: (c.entity_value, c.t)):
        label = compute_label(task, dataset, cutoff)
        if label is None:
            skipped += 1
            continue
        lo = cutoff.t + task.params.lead
        examples.append(
            LabeledExample(
                cutoff=cutoff,
                label=label,
                label_window=(lo, lo + task.params.window),
                feature_window=(cutoff.t - task.params.history, cutoff.t),
            )
        )
    label_type = "categorical" if task.agg.op is AggOp.MAJORITY else "numeric"
    return TrainingSet(task=task, examples=tuple(examples), label_type=label_type, skipped=skipped)


def assess_sufficiency(
    ts: TrainingSet,
    min_total: int = 30,
    target_total: int = 200,
    min_per_class: int = 5,
) -> SufficiencyReport:
    """Score whether the task yields enough examples (and class balance)."""
    n = len(ts.examples)
    per_class: dict[str, int] | None = None
    if ts.label_type == "categorical":
        per_class = {}
        for ex in ts.examples:
            per_class[str(ex.label)] = per_class.get(str(ex.label), 0) + 1
    if n < min_total:
        score = 0.0
    else:
        score = min(n / target_total, 1.0)
        if per_class is not None and any(c < min_per_class for c in per_class.values()):
            score = 0.0
    return SufficiencyReport(n_examples=n, n_per_class=per_class, score=score)


def estimate_sufficiency(
    dataset: Dataset,
    task: Task,
    min_total: int = 30,
    target_total: int = 200,
) -> SufficiencyReport:
    """Label-free sufficiency estimate from the cutoff count alone.

    Used for promise screening before any labels exist; the per-class
    check is deferred to the exact report.
    """
    try:
        n = len(generate_cutoffs(dataset, task))
    except WindowExceedsSpan:
        n = 0
    score = 0.0 if n < min_total else min(n / target_total, 1.0)
    return SufficiencyReport(n_examples=n, n_per_class=None, score=score, estimated=True)


def export_training_set(ts: TrainingSet, csv_path: str | Path, manifest_path: str | Path | None = None) -> None:
    """Write examples as CSV (entity, cutoff_epoch, label) plus a JSON manifest."""
    if not ts.examples:
        raise EmptyTrainingSet("no labeled examples to export")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["entity", "cutoff_epoch", "label"])
        for ex in ts.examples:
            writer.writerow([ex.cutoff.entity_value, ex.cutoff.t, ex.label])
    if manifest_path is not None:
        manifest = {
            "task_id": ts.task.id,
            "params": {
                "window": ts.task.params.window,
                "lead": ts.task.params.lead,
                "history": ts.task.params.history,
            },
            "label_type": ts.label_type,
            "n_examples": len(ts.examples),
            "skipped": ts.skipped,
        }
        with open(manifest_path, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
