"""Universe generation against an independent brute-force oracle."""

from __future__ import annotations

import random

import pytest

from taskmill import (
    AggOp,
    AttributeKind,
    FilterOp,
    OpConfig,
    Schema,
    check_validity,
    count_tasks,
    enumerate_tasks,
    instantiate_thresholds,
    parse_petel,
)
from taskmill.dataset import AttributeStats
from taskmill.enumeration import write_universe
from taskmill.errors import NoDataForAttribute, NoEntityAttribute
from taskmill.petel import AggExpr, FilterExpr, Task, render_petel


def brute_force_triples(schema: Schema) -> list[tuple[str, str, str, str, str]]:
    """Independent enumerator: plain loops over a literal rule table.

    Returns (entity, filter_op, filter_attr, agg_op, agg_attr) tuples with
    "" for empty slots. Written before the production path and kept free
    of its helpers.
    """
    entities = [n for n, k in schema.attributes if k is AttributeKind.ENTITY]
    numericals = [n for n, k in schema.attributes if k is AttributeKind.NUMERICAL]
    categoryish = [n for n, k in schema.attributes
                   if k in (AttributeKind.CATEGORICAL, AttributeKind.ENTITY)]
    out = []
    for entity in entities:
        filters = [("all_fil", "")]
        for op in ("greater_fil", "less_fil"):
            for attr in numericals:
                filters.append((op, attr))
        for op in ("eq_fil", "neq_fil"):
            for attr in categoryish:
                if attr != entity:
                    filters.append((op, attr))
        aggs = [("count_agg", "")]
        for op in ("sum_agg", "avg_agg", "min_agg", "max_agg"):
            for attr in numericals:
                aggs.append((op, attr))
        for attr in categoryish:
            if attr != entity:
                aggs.append(("majority_agg", attr))
        for fop, fattr in filters:
            for aop, aattr in aggs:
                out.append((entity, fop, fattr, aop, aattr))
    return out


def random_schema(rng: random.Random) -> Schema:
    """Fuzzed schema with <= 8 non-time attributes and >= 1 entity."""
    n_entity = rng.randint(1, 3)
    n_cat = rng.randint(0, 3)
    n_num = rng.randint(0, 8 - n_entity - n_cat)
    attrs = [("TS", AttributeKind.TIME)]
    attrs += [(f"E{i}", AttributeKind.ENTITY) for i in range(n_entity)]
    attrs += [(f"C{i}", AttributeKind.CATEGORICAL) for i in range(n_cat)]
    attrs += [(f"X{i}", AttributeKind.NUMERICAL) for i in range(n_num)]
    return Schema("fuzz", tuple(attrs))


ONE_OF_EACH = Schema(
    "one",
    (
        ("T", AttributeKind.TIME),
        ("E", AttributeKind.ENTITY),
        ("X", AttributeKind.NUMERICAL),
    ),
)


class TestEnumerate:
    def test_single_numeric_schema_is_15(self):
        universe = enumerate_tasks(ONE_OF_EACH)
        # filters {all, greater(X), less(X)} x aggs {count, sum, avg, min, max}
        assert universe.n == 15
        assert count_tasks(ONE_OF_EACH) == 15

    def test_two_numericals_is_45(self):
        schema = Schema("two", ONE_OF_EACH.attributes + (("Y", AttributeKind.NUMERICAL),))
        assert count_tasks(schema) == 45
        assert enumerate_tasks(schema).n == 45

    def test_entity_only_schema_is_single_task(self):
        schema = Schema("bare", (("T", AttributeKind.TIME), ("E", AttributeKind.ENTITY)))
        universe = enumerate_tasks(schema)
        assert universe.n == 1
        only = universe.tasks[0]
        assert only.filter.op is FilterOp.ALL and only.agg.op is AggOp.COUNT

    def test_degenerate_config_counts_entities(self):
        schema = Schema(
            "three",
            (
                ("T", AttributeKind.TIME),
                ("E1", AttributeKind.ENTITY),
                ("E2", AttributeKind.ENTITY),
                ("X", AttributeKind.NUMERICAL),
            ),
        )
        config = OpConfig(
            enabled_filter_ops=frozenset({FilterOp.ALL}),
            enabled_agg_ops=frozenset({AggOp.COUNT}),
        )
        assert count_tasks(schema, config) == 2
        assert enumerate_tasks(schema, config).n == 2

    def test_no_entity_attribute(self):
        schema = Schema("none", (("T", AttributeKind.TIME), ("X", AttributeKind.NUMERICAL)))
        with pytest.raises(NoEntityAttribute):
            enumerate_tasks(schema)
        with pytest.raises(NoEntityAttribute):
            count_tasks(schema)

    def test_matches_brute_force_on_flight_schema(self, flight_schema):
        universe = enumerate_tasks(flight_schema)
        oracle = brute_force_triples(flight_schema)
        assert universe.n == len(oracle) == count_tasks(flight_schema)
        produced = {
            (t.entity, t.filter.op.value, t.filter.attribute or "",
             t.agg.op.value, t.agg.attribute or "")
            for t in universe.tasks
        }
        assert produced == set(oracle)

    def test_matches_brute_force_on_100_fuzzed_schemas(self):
        rng = random.Random(7)
        for _ in range(100):
            schema = random_schema(rng)
            assert count_tasks(schema) == len(brute_force_triples(schema))
            assert enumerate_tasks(schema).n == count_tasks(schema)

    def test_deterministic_order(self, flight_schema):
        first = [t.id for t in enumerate_tasks(flight_schema).tasks]
        second = [t.id for t in enumerate_tasks(flight_schema).tasks]
        assert first == second

    def test_no_duplicate_ids(self, flight_schema):
        ids = [t.id for t in enumerate_tasks(flight_schema).tasks]
        assert len(ids) == len(set(ids))

    def test_every_emitted_task_passes_validity(self, flight_schema):
        for task in enumerate_tasks(flight_schema).tasks:
            assert check_validity(task, flight_schema).valid

    def test_monotone_in_added_attribute(self):
        rng = random.Random(11)
        for _ in range(20):
            schema = random_schema(rng)
            bigger = Schema("plus", schema.attributes + (("EXTRA", AttributeKind.NUMERICAL),))
            assert count_tasks(bigger) >= count_tasks(schema)

    def test_universe_jsonl_round_trip(self, flight_schema, tmp_path):
        universe = enumerate_tasks(flight_schema)
        path = tmp_path / "universe.jsonl"
        write_universe(universe, path)
        import json

        lines = path.read_text().strip().split("\n")
        assert len(lines) == universe.n
        first = json.loads(lines[0])
        assert parse_petel(first["petel"]).id == first["id"]


def numeric_stats(values: list[float]) -> AttributeStats:
    from taskmill import nearest_rank_quantile as q

    return AttributeStats(
        attribute="X",
        count_present=len(values),
        count_missing=0,
        minimum=min(values),
        maximum=max(values),
        q25=q(values, 0.25),
        q50=q(values, 0.5),
        q75=q(values, 0.75),
    )


class TestThresholds:
    def test_numeric_quantile_instantiation(self):
        task = Task("E", FilterExpr(FilterOp.GREATER, "X"), AggExpr(AggOp.COUNT))
        out = instantiate_thresholds(task, numeric_stats([0.0, 10.0, 30.0, 60.0]))
        assert [t.filter.threshold for t in out] == [10.0, 30.0, 60.0]
        assert len({t.id for t in out}) == 3

    def test_equal_quantiles_collapse(self):
        task = Task("E", FilterExpr(FilterOp.LESS, "X"), AggExpr(AggOp.COUNT))
        out = instantiate_thresholds(task, numeric_stats([5.0, 5.0, 5.0, 5.0]))
        assert [t.filter.threshold for t in out] == [5.0]

    def test_categorical_frequency_order(self):
        task = Task("E", FilterExpr(FilterOp.EQ, "C"), AggExpr(AggOp.COUNT))
        stats = AttributeStats("C", 6, 0, frequencies={"weather": 5, "crew": 1})
        out = instantiate_thresholds(task, stats, OpConfig(eq_value_limit=1))
        assert [t.filter.threshold for t in out] == ["weather"]

    def test_pass_through_for_resolved_and_all_fil(self):
        stats = AttributeStats("X", 1, 0, minimum=1.0, maximum=1.0, q25=1.0, q50=1.0, q75=1.0)
        plain = Task("E", FilterExpr(FilterOp.ALL), AggExpr(AggOp.COUNT))
        assert instantiate_thresholds(plain, stats) == [plain]
        resolved = Task("E", FilterExpr(FilterOp.GREATER, "X", 2.0), AggExpr(AggOp.COUNT))
        assert instantiate_thresholds(resolved, stats) == [resolved]

    def test_no_data_for_attribute(self):
        task = Task("E", FilterExpr(FilterOp.GREATER, "X"), AggExpr(AggOp.COUNT))
        with pytest.raises(NoDataForAttribute):
            instantiate_thresholds(task, AttributeStats("X", 0, 10))

    def test_resolved_tasks_keep_params_and_render(self):
        task = parse_petel(
            "Entity: E\nFilter: greater_fil(<X>)\nAggregator: count_agg(None)"
            "\nParams: window=2d,lead=0d,history=7d"
        )
        out = instantiate_thresholds(task, numeric_stats([1.0, 2.0, 3.0, 4.0]))
        for concrete in out:
            assert concrete.params == task.params
            assert parse_petel(render_petel(concrete)) == concrete


class TestOpConfig:
    def test_rejects_empty_op_sets(self):
        with pytest.raises(ValueError):
            OpConfig(enabled_filter_ops=frozenset())

    def test_rejects_bad_quantiles(self):
        with pytest.raises(ValueError):
            OpConfig(threshold_quantiles=(0.5, 0.25))
        with pytest.raises(ValueError):
            OpConfig(threshold_quantiles=(0.0, 0.5))
