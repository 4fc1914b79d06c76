"""Task-universe generation over a schema.

Every combination of grouping entity, filter, and aggregator that passes
the operator type rules is emitted, in deterministic lexicographic order,
with thresholds left unresolved. Thresholds are instantiated later, from
data quantiles or frequent category literals, for tasks that survive the
promise screen; the combinatorial growth is paid only for survivors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .dataset import AttributeStats
from .errors import NoDataForAttribute, NoEntityAttribute, UnknownAttribute
from .petel import (
    AggExpr,
    AggOp,
    CATEGORY_FILTER_OPS,
    DEFAULT_PARAMS,
    FilterExpr,
    FilterOp,
    NUMERIC_AGG_OPS,
    NUMERIC_FILTER_OPS,
    SearchParams,
    Task,
    render_petel,
)
from .schema import AttributeKind, Schema

_CATEGORY_LIKE = (AttributeKind.CATEGORICAL, AttributeKind.ENTITY)


@dataclass(frozen=True)
class OpConfig:
    """Which operators participate and how thresholds get instantiated."""

    enabled_filter_ops: frozenset[FilterOp] = frozenset(FilterOp)
    enabled_agg_ops: frozenset[AggOp] = frozenset(AggOp)
    threshold_quantiles: tuple[float, ...] = (0.25, 0.5, 0.75)
    eq_value_limit: int = 5

    def __post_init__(self) -> None:
        if not self.enabled_filter_ops or not self.enabled_agg_ops:
            raise ValueError("operator sets must be non-empty")
        qs = self.threshold_quantiles
        if any(not 0 < q < 1 for q in qs) or list(qs) != sorted(set(qs)):
            raise ValueError("threshold quantiles must be strictly increasing in (0, 1)")
        if self.eq_value_limit < 1:
            raise ValueError("eq_value_limit must be at least 1")


@dataclass(frozen=True)
class TaskUniverse:
    schema: Schema
    tasks: tuple[Task, ...]

    @property
    def n(self) -> int:
        return len(self.tasks)


def _filters_for(schema: Schema, entity: str, config: OpConfig) -> Iterator[FilterExpr]:
    numeric_ops = sorted(NUMERIC_FILTER_OPS & config.enabled_filter_ops, key=lambda o: o.value)
    category_ops = sorted(CATEGORY_FILTER_OPS & config.enabled_filter_ops, key=lambda o: o.value)
    category_attrs = [a for a in schema.names_of(*_CATEGORY_LIKE) if a != entity]
    combos: list[tuple[str, str]] = []
    if FilterOp.ALL in config.enabled_filter_ops:
        combos.append((FilterOp.ALL.value, ""))
    combos += [(op.value, a) for op in numeric_ops for a in schema.numericals]
    combos += [(op.value, a) for op in category_ops for a in category_attrs]
    for op_name, attr in sorted(combos):
        op = FilterOp(op_name)
        yield FilterExpr(op) if op is FilterOp.ALL else FilterExpr(op, attr)


def _aggs_for(schema: Schema, entity: str, config: OpConfig) -> Iterator[AggExpr]:
    numeric_ops = sorted(NUMERIC_AGG_OPS & config.enabled_agg_ops, key=lambda o: o.value)
    category_attrs = [a for a in schema.names_of(*_CATEGORY_LIKE) if a != entity]
    combos: list[tuple[str, str]] = []
    if AggOp.COUNT in config.enabled_agg_ops:
        combos.append((AggOp.COUNT.value, ""))
    combos += [(op.value, a) for op in numeric_ops for a in schema.numericals]
    if AggOp.MAJORITY in config.enabled_agg_ops:
        combos += [(AggOp.MAJORITY.value, a) for a in category_attrs]
    for op_name, attr in sorted(combos):
        op = AggOp(op_name)
        yield AggExpr(op) if op is AggOp.COUNT else AggExpr(op, attr)


def enumerate_tasks(
    schema: Schema, config: OpConfig = OpConfig(), params: SearchParams = DEFAULT_PARAMS
) -> TaskUniverse:
    """Emit the full task universe, ordered by (entity, filter, aggregator).

    The grouping entity never appears as a filter or majority attribute
    (it is constant within its own groups). Every emitted task satisfies
    the operator type rules by construction.
    """
    if not schema.entities:
        raise NoEntityAttribute(f"schema {schema.name!r} declares no entity attribute")
    tasks: list[Task] = []
    for entity in sorted(schema.entities):
        filters = list(_filters_for(schema, entity, config))
        aggs = list(_aggs_for(schema, entity, config))
        for filt in filters:
            for agg in aggs:
                tasks.append(Task(entity=entity, filter=filt, agg=agg, params=params))
    return TaskUniverse(schema=schema, tasks=tuple(tasks))


def count_tasks(schema: Schema, config: OpConfig = OpConfig()) -> int:
    """Closed-form universe size; always equals len(enumerate_tasks(...).tasks)."""
    if not schema.entities:
        raise NoEntityAttribute(f"schema {schema.name!r} declares no entity attribute")
    n_numeric = len(schema.numericals)
    n_category_like = len(schema.categoricals) + len(schema.entities)
    numeric_filter_ops = len(NUMERIC_FILTER_OPS & config.enabled_filter_ops)
    category_filter_ops = len(CATEGORY_FILTER_OPS & config.enabled_filter_ops)
    numeric_agg_ops = len(NUMERIC_AGG_OPS & config.enabled_agg_ops)

    total = 0
    for _entity in schema.entities:
        others = n_category_like - 1
        n_filters = (
            (1 if FilterOp.ALL in config.enabled_filter_ops else 0)
            + numeric_filter_ops * n_numeric
            + category_filter_ops * others
        )
        n_aggs = (
            (1 if AggOp.COUNT in config.enabled_agg_ops else 0)
            + numeric_agg_ops * n_numeric
            + (others if AggOp.MAJORITY in config.enabled_agg_ops else 0)
        )
        total += n_filters * n_aggs
    return total


def instantiate_thresholds(task: Task, stats: AttributeStats, config: OpConfig = OpConfig()) -> list[Task]:
    """Resolve a task's filter threshold against attribute statistics.

    Numeric filters get one concrete task per configured quantile (equal
    quantiles are collapsed so task ids stay unique); eq/neq filters get one
    task per most-frequent literal, up to the configured limit. Tasks with
    no unresolved threshold pass through unchanged.
    """
    f = task.filter
    if f.op is FilterOp.ALL or f.threshold is not None:
        return [task]
    if stats.attribute != f.attribute:
        raise UnknownAttribute(
            f"stats are for {stats.attribute}, filter needs {f.attribute}"
        )
    if stats.count_present == 0:
        raise NoDataForAttribute(f.attribute)

    thresholds: list[float | str]
    if f.op in NUMERIC_FILTER_OPS:
        quantiles = {0.25: stats.q25, 0.5: stats.q50, 0.75: stats.q75}
        values = []
        for q in config.threshold_quantiles:
            if q not in quantiles or quantiles[q] is None:
                raise ValueError(f"no precomputed quantile for p={q}")
            values.append(float(quantiles[q]))
        thresholds = list(dict.fromkeys(values))
    else:
        if not stats.frequencies:
            raise NoDataForAttribute(f.attribute)
        ordered = sorted(stats.frequencies.items(), key=lambda kv: (-kv[1], kv[0]))
        thresholds = [literal for literal, _count in ordered[: config.eq_value_limit]]

    return [
        Task(
            entity=task.entity,
            filter=FilterExpr(f.op, f.attribute, threshold),
            agg=task.agg,
            params=task.params,
        )
        for threshold in thresholds
    ]


def write_universe(universe: TaskUniverse, path: str | Path) -> None:
    """Export one canonical task text + id per JSONL line."""
    with open(path, "w", encoding="utf-8") as fh:
        for task in universe.tasks:
            fh.write(json.dumps({"id": task.id, "petel": render_petel(task)}) + "\n")
