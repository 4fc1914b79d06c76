"""End-to-end orchestration and the per-session metric store.

The pipeline enumerates the task universe, gates on validity, screens by
promise, instantiates thresholds for the survivors, engineers labels,
evaluates baselines, and ranks by utility with a diversity pass. Every
stage's scores land in an append-only metric store, latest record per
task winning. A fixed seed makes whole runs byte-reproducible: bootstrap
sub-seeds derive from the run seed and task id, evaluation timing uses a
deterministic tick clock, and store records carry a per-run logical
sequence number instead of wall-clock time.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .dataset import AttributeStats, Dataset, compute_stats
from .enumeration import OpConfig, enumerate_tasks, instantiate_thresholds
from .errors import EngineError
from .labeling import (
    SufficiencyReport,
    assess_sufficiency,
    build_training_set,
    estimate_sufficiency,
)
from .models import ModelKind, TaskMetrics, evaluate_task
from .petel import SearchParams, Task, ValidityRule, check_validity, render_petel
from .recommend import (
    PromiseScore,
    RankingModel,
    Recommendation,
    TaskFeatures,
    UtilityWeights,
    apply_feedback,
    business_value,
    featurize_task,
    rank_static,
    rerank_diverse,
    score_promise,
    score_utility,
    select_promising,
)

log = logging.getLogger(__name__)


class TickClock:
    """Deterministic stand-in for perf_counter: one millisecond per call."""

    def __init__(self) -> None:
        self.calls = 0

    def __call__(self) -> float:
        self.calls += 1
        return self.calls * 0.001


def derive_seed(run_seed: int, task_id: str) -> int:
    digest = hashlib.blake2b(f"{run_seed}:{task_id}".encode(), digest_size=4).digest()
    return int.from_bytes(digest, "big")


@dataclass
class StoreRecord:
    task_id: str
    petel: str
    promise: dict | None
    metrics: dict | None
    status: str  # "scored" | "evaluated" | "failed"
    ts: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "task_id": self.task_id,
                "petel": self.petel,
                "promise": self.promise,
                "metrics": self.metrics,
                "status": self.status,
                "ts": self.ts,
            },
            sort_keys=True,
        )


class MetricStore:
    """Append-only score log; the view keeps the latest record per task."""

    def __init__(self) -> None:
        self.records: list[StoreRecord] = []
        self._next_ts = 0

    def append(self, record: StoreRecord) -> None:
        self.records.append(record)

    def stamp(self) -> int:
        self._next_ts += 1
        return self._next_ts

    def view(self) -> dict[str, StoreRecord]:
        latest: dict[str, StoreRecord] = {}
        for record in self.records:  # append order is temporal order
            latest[record.task_id] = record
        return latest

    def __len__(self) -> int:
        return len(self.records)


def persist_store(store: MetricStore, path: str | Path) -> None:
    """Append every record as one JSONL line."""
    with open(path, "a", encoding="utf-8") as fh:
        for record in store.records:
            fh.write(record.to_json() + "\n")


def load_store(path: str | Path) -> MetricStore:
    """Rebuild a store from JSONL; corrupt lines are skipped with a warning."""
    store = MetricStore()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                record = StoreRecord(
                    task_id=doc["task_id"],
                    petel=doc["petel"],
                    promise=doc.get("promise"),
                    metrics=doc.get("metrics"),
                    status=doc["status"],
                    ts=int(doc["ts"]),
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                log.warning("skipping corrupt store line %d in %s", lineno, path)
                continue
            store.append(record)
            store._next_ts = max(store._next_ts, record.ts)
    return store


@dataclass
class Session:
    """One user's working state: data, knobs, and the evolving ranker."""

    id: str
    dataset: Dataset
    op_config: OpConfig = OpConfig()
    params: SearchParams = SearchParams()
    m: int = 20
    k: int = 5
    lam: float = 1.0
    seed: int = 0
    business_weights: Mapping[str, float] = field(default_factory=dict)
    utility_weights: UtilityWeights = UtilityWeights()
    rules: tuple[ValidityRule, ...] = ()
    model: RankingModel = field(default_factory=RankingModel)
    store: MetricStore = field(default_factory=MetricStore)
    workers: int = 1

    # populated by run_pipeline; consumed by re-ranking and feedback
    evaluated: list["EvaluatedTask"] = field(default_factory=list)
    recommendations: list[Recommendation] = field(default_factory=list)
    stale: bool = False

    def __post_init__(self) -> None:
        if not self.m >= self.k >= 1:
            raise ValueError(f"need m >= k >= 1, got m={self.m} k={self.k}")


@dataclass
class EvaluatedTask:
    task: Task
    features: TaskFeatures
    promise: PromiseScore
    sufficiency: SufficiencyReport
    metrics: TaskMetrics
    business: float

    def metric_components(self, model: RankingModel) -> dict[str, float]:
        return {
            "accuracy": self.metrics.accuracy,
            "train_seconds": self.metrics.train_seconds,
            "confidence": self.metrics.confidence,
            "explainability": self.metrics.explainability,
            "sufficiency": self.sufficiency.score,
            "preference": model.preference(self.features),
            "business_value": self.business,
            "promise": self.promise.promise,
        }


def _promise_dict(p: PromiseScore) -> dict:
    return {
        "validity": p.validity,
        "preference": p.preference,
        "business_value": p.business_value,
        "sufficiency": p.sufficiency,
        "promise": p.promise,
    }


def _metrics_dict(m: TaskMetrics) -> dict:
    return {
        "accuracy": m.accuracy,
        "train_seconds": m.train_seconds,
        "confidence": m.confidence,
        "explainability": m.explainability,
        "diagnostics": m.diagnostics,
    }


def _utilities(session: Session) -> dict[str, float]:
    return {
        ev.task.id: score_utility(ev.features, session.utility_weights, session.model, ev.business)
        for ev in session.evaluated
    }


def current_ranking(session: Session, k: int | None = None, lam: float | None = None) -> list[Recommendation]:
    """Static top-k of the session's evaluated tasks, then the diversity pass."""
    if not session.evaluated:
        return []
    k = session.k if k is None else k
    lam = session.lam if lam is None else lam
    utilities = _utilities(session)
    metrics_by_id = {ev.task.id: ev.metric_components(session.model) for ev in session.evaluated}
    static = rank_static(
        [ev.task for ev in session.evaluated],
        utilities,
        k,
        session.dataset.schema,
        metrics_by_id,
        session.rules,
    )
    return rerank_diverse(static, lam, k)


def run_pipeline(session: Session) -> list[Recommendation]:
    """Execute the full flow and persist every stage's scores to the store.

    Failures are isolated per task: a task that cannot be engineered or
    evaluated is recorded as failed and the run continues.
    """
    schema = session.dataset.schema
    universe = enumerate_tasks(schema, session.op_config, session.params)

    validity = {t.id: check_validity(t, schema, session.rules) for t in universe.tasks}
    promises: dict[str, PromiseScore] = {}
    for task in universe.tasks:
        estimate = estimate_sufficiency(session.dataset, task)
        promises[task.id] = score_promise(
            task, validity[task.id], session.model, session.business_weights,
            estimate, schema=schema,
        )
        session.store.append(
            StoreRecord(
                task_id=task.id,
                petel=render_petel(task),
                promise=_promise_dict(promises[task.id]),
                metrics=None,
                status="scored",
                ts=session.store.stamp(),
            )
        )

    selected = select_promising(list(universe.tasks), promises, session.m)

    # resolve thresholds only for survivors; stats are cached per attribute
    stats_cache: dict[str, AttributeStats] = {}
    concrete: list[Task] = []
    failed: list[tuple[Task, str]] = []
    for task in selected:
        attr = task.filter.attribute
        try:
            if attr is None or task.filter.resolved:
                concrete.append(task)
                continue
            if attr not in stats_cache:
                stats_cache[attr] = compute_stats(session.dataset, attr)
            concrete.extend(instantiate_thresholds(task, stats_cache[attr], session.op_config))
        except EngineError as exc:
            failed.append((task, f"threshold: {exc}"))

    concrete.sort(key=lambda t: t.id)

    def evaluate_one(task: Task) -> EvaluatedTask:
        ts = build_training_set(task, session.dataset)
        sufficiency = assess_sufficiency(ts)
        metrics = evaluate_task(
            task, ts, session.dataset,
            kinds=tuple(ModelKind),
            seed=derive_seed(session.seed, task.id),
            timer=TickClock(),
        )
        features = featurize_task(task, schema, metrics, sufficiency)
        promise = promises.get(task.id) or score_promise(
            task, check_validity(task, schema, session.rules), session.model,
            session.business_weights, sufficiency, schema=schema,
        )
        return EvaluatedTask(
            task=task,
            features=features,
            promise=promise,
            sufficiency=sufficiency,
            metrics=metrics,
            business=business_value(task, session.business_weights),
        )

    session.evaluated = []
    results: list[tuple[Task, EvaluatedTask | None, str | None]] = []
    if session.workers > 1:
        with ThreadPoolExecutor(max_workers=session.workers) as pool:
            futures = {t.id: pool.submit(evaluate_one, t) for t in concrete}
        for task in concrete:  # collection order is task order, not completion order
            try:
                results.append((task, futures[task.id].result(), None))
            except EngineError as exc:
                results.append((task, None, str(exc)))
    else:
        for task in concrete:
            try:
                results.append((task, evaluate_one(task), None))
            except EngineError as exc:
                results.append((task, None, str(exc)))

    for task, evaluated, error in results:
        if evaluated is None:
            failed.append((task, error or "evaluation failed"))
            continue
        session.evaluated.append(evaluated)
        session.store.append(
            StoreRecord(
                task_id=task.id,
                petel=render_petel(task),
                promise=_promise_dict(evaluated.promise),
                metrics=_metrics_dict(evaluated.metrics),
                status="evaluated",
                ts=session.store.stamp(),
            )
        )

    for task, error in failed:
        log.warning("task %s failed: %s", task.id, error)
        session.store.append(
            StoreRecord(
                task_id=task.id,
                petel=render_petel(task),
                promise=_promise_dict(promises[task.id]) if task.id in promises else None,
                metrics={"error": error},
                status="failed",
                ts=session.store.stamp(),
            )
        )

    session.recommendations = current_ranking(session)
    session.stale = False
    return session.recommendations


def give_feedback(session: Session, task_id: str, verdict: str) -> list[Recommendation]:
    """Apply one verdict and return the refreshed ranking in the same call."""
    target = next((ev for ev in session.evaluated if ev.task.id == task_id), None)
    if target is None:
        raise KeyError(task_id)
    session.model = apply_feedback(session.model, target.features, verdict)
    session.recommendations = current_ranking(session)
    return session.recommendations


def recommendations_jsonable(recs: Sequence[Recommendation]) -> list[dict]:
    return [
        {
            "rank": i + 1,
            "task_id": rec.task.id,
            "petel": rec.petel,
            "nl": rec.nl,
            "utility": rec.utility,
            "metrics": dict(rec.metrics),
        }
        for i, rec in enumerate(recs)
    ]


def recommendations_json(recs: Sequence[Recommendation]) -> str:
    return json.dumps({"recommendations": recommendations_jsonable(recs)}, sort_keys=True, indent=2)
