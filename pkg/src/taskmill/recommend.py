"""Promise screening, utility ranking, online feedback, and diversity.

Tasks are screened before model evaluation with a promise score that
gates on validity and mixes user preference, business value, and example
sufficiency. Evaluated tasks are ranked by a utility score over seven
bounded metrics. Preference comes from an online logistic ranker over
schema-name-free task features (attribute kinds, not names), which makes
a trained ranker portable across datasets; useful/not-useful feedback
updates it one logistic step at a time. A greedy maximal-marginal-
relevance pass trades utility against signature diversity.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .errors import CorruptBlob, MissingMetrics, VersionError
from .labeling import SufficiencyReport
from .models import TaskMetrics
from .petel import (
    AggOp,
    FilterOp,
    Task,
    ValidityResult,
    ValidityRule,
    render_nl,
    render_petel,
)
from .schema import AttributeKind, Schema

FEATURE_LAYOUT_VERSION = 1

# Fixed 25-slot layout. Attribute KINDS (never names) keep vectors
# comparable across datasets:
#   0-4   filter op one-hot, ops sorted by name
#   5-10  aggregator op one-hot, ops sorted by name
#   11-14 filter attribute kind one-hot (all zero for all_fil)
#   15-18 aggregator attribute kind one-hot (all zero for count_agg)
#   19-23 sufficiency, accuracy, confidence, explainability, 1/(1+seconds)
#         (all zero until evaluation has run; the bias slot marks presence
#         of the vector itself)
#   24    bias, always 1.0
_FILTER_SLOTS = tuple(sorted(FilterOp, key=lambda o: o.value))
_AGG_SLOTS = tuple(sorted(AggOp, key=lambda o: o.value))
_KIND_SLOTS = tuple(sorted(AttributeKind, key=lambda k: k.value))
FEATURE_DIM = len(_FILTER_SLOTS) + len(_AGG_SLOTS) + 2 * len(_KIND_SLOTS) + 5 + 1

_METRIC_BASE = len(_FILTER_SLOTS) + len(_AGG_SLOTS) + 2 * len(_KIND_SLOTS)


@dataclass(frozen=True)
class TaskFeatures:
    task_id: str
    vector: tuple[float, ...]
    has_metrics: bool

    def __post_init__(self) -> None:
        if len(self.vector) != FEATURE_DIM:
            raise ValueError(f"feature vector must have {FEATURE_DIM} slots")


def featurize_task(
    task: Task,
    schema: Schema,
    metrics: TaskMetrics | None = None,
    sufficiency: SufficiencyReport | None = None,
) -> TaskFeatures:
    """Binary structure slots plus bounded metric slots; deterministic."""
    vec = [0.0] * FEATURE_DIM
    vec[_FILTER_SLOTS.index(task.filter.op)] = 1.0
    vec[len(_FILTER_SLOTS) + _AGG_SLOTS.index(task.agg.op)] = 1.0
    base = len(_FILTER_SLOTS) + len(_AGG_SLOTS)
    if task.filter.attribute is not None:
        kind = schema.kind_of(task.filter.attribute)
        if kind is not None:
            vec[base + _KIND_SLOTS.index(kind)] = 1.0
    if task.agg.attribute is not None:
        kind = schema.kind_of(task.agg.attribute)
        if kind is not None:
            vec[base + len(_KIND_SLOTS) + _KIND_SLOTS.index(kind)] = 1.0
    if sufficiency is not None:
        vec[_METRIC_BASE] = sufficiency.score
    if metrics is not None:
        vec[_METRIC_BASE + 1] = metrics.accuracy
        vec[_METRIC_BASE + 2] = metrics.confidence
        vec[_METRIC_BASE + 3] = metrics.explainability
        vec[_METRIC_BASE + 4] = 1.0 / (1.0 + max(metrics.train_seconds, 0.0))
    vec[-1] = 1.0
    return TaskFeatures(task_id=task.id, vector=tuple(vec), has_metrics=metrics is not None)


def _sigmoid(z: float) -> float:
    z = max(-500.0, min(500.0, z))
    return 1.0 / (1.0 + math.exp(-z))


@dataclass(frozen=True)
class FeedbackEvent:
    task_id: str
    verdict: str  # "useful" | "not_useful"
    timestamp: float


@dataclass(frozen=True)
class RankingModel:
    """Online logistic ranker; the zero model scores every task 0.5."""

    weights: tuple[float, ...] = tuple([0.0] * FEATURE_DIM)
    eta: float = 0.1
    feedback: tuple[FeedbackEvent, ...] = ()

    def __post_init__(self) -> None:
        if len(self.weights) != FEATURE_DIM:
            raise ValueError(f"weight vector must have {FEATURE_DIM} slots")
        if self.eta <= 0:
            raise ValueError("learning rate must be positive")

    def decision(self, features: TaskFeatures) -> float:
        return sum(w * x for w, x in zip(self.weights, features.vector))

    def preference(self, features: TaskFeatures) -> float:
        return _sigmoid(self.decision(features))


def apply_feedback(model: RankingModel, features: TaskFeatures, verdict: str) -> RankingModel:
    """One logistic step toward the verdict; returns the updated model.

    The bias slot keeps every feature vector's norm at least 1, so the
    judged task's own preference moves strictly in the verdict's direction.
    """
    if verdict not in ("useful", "not_useful"):
        raise ValueError(f"verdict must be useful or not_useful, got {verdict!r}")
    y = 1.0 if verdict == "useful" else 0.0
    p = model.preference(features)
    step = model.eta * (y - p)
    weights = tuple(w + step * x for w, x in zip(model.weights, features.vector))
    event = FeedbackEvent(task_id=features.task_id, verdict=verdict, timestamp=time.time())
    return replace(model, weights=weights, feedback=model.feedback + (event,))


def export_model(model: RankingModel) -> str:
    """Portable blob; schema-free because features are kind-based."""
    return json.dumps(
        {
            "version": FEATURE_LAYOUT_VERSION,
            "eta": model.eta,
            "weights": list(model.weights),
            "feedback_count": len(model.feedback),
        },
        sort_keys=True,
    )


def import_model(blob: str, eta_override: float | None = None) -> RankingModel:
    """Rebuild a ranker from a blob; usable for scoring and further feedback."""
    try:
        doc = json.loads(blob)
    except (json.JSONDecodeError, TypeError) as exc:
        raise CorruptBlob(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "version" not in doc:
        raise CorruptBlob("blob is not a model document")
    if doc["version"] != FEATURE_LAYOUT_VERSION:
        raise VersionError(doc["version"], FEATURE_LAYOUT_VERSION)
    try:
        weights = tuple(float(w) for w in doc["weights"])
        eta = float(doc["eta"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptBlob(f"malformed model fields: {exc}") from exc
    if len(weights) != FEATURE_DIM:
        raise CorruptBlob(f"expected {FEATURE_DIM} weights, got {len(weights)}")
    return RankingModel(weights=weights, eta=eta_override if eta_override else eta)


# ---------------------------------------------------------------------------
# promise

PROMISE_WEIGHTS = {"preference": 0.5, "business": 0.25, "sufficiency": 0.25}


@dataclass(frozen=True)
class PromiseScore:
    validity: float
    preference: float
    business_value: float
    sufficiency: float
    promise: float


def business_value(task: Task, weights: Mapping[str, float]) -> float:
    """Mean user-assigned importance over the attributes the task touches."""
    referenced = {task.entity}
    if task.filter.attribute is not None:
        referenced.add(task.filter.attribute)
    if task.agg.attribute is not None:
        referenced.add(task.agg.attribute)
    lookup = {k.upper(): v for k, v in weights.items()}
    return sum(lookup.get(a, 0.5) for a in referenced) / len(referenced)


def score_promise(
    task: Task,
    validity: ValidityResult,
    model: RankingModel,
    business_weights: Mapping[str, float],
    sufficiency: SufficiencyReport | None,
    schema: Schema | None = None,
    features: TaskFeatures | None = None,
) -> PromiseScore:
    """Validity-gated mix of preference, business value, and sufficiency."""
    if features is None:
        if schema is None:
            raise ValueError("pass either features or a schema")
        features = featurize_task(task, schema, metrics=None, sufficiency=sufficiency)
    preference = model.preference(features)
    business = business_value(task, business_weights)
    f_e = sufficiency.score if sufficiency is not None else 0.0
    blend = (
        PROMISE_WEIGHTS["preference"] * preference
        + PROMISE_WEIGHTS["business"] * business
        + PROMISE_WEIGHTS["sufficiency"] * f_e
    )
    return PromiseScore(
        validity=validity.score,
        preference=preference,
        business_value=business,
        sufficiency=f_e,
        promise=validity.score * blend,
    )


def select_promising(
    universe_tasks: Sequence[Task], scores: Mapping[str, PromiseScore], m: int
) -> list[Task]:
    """Top-m valid tasks by promise, ties broken by ascending task id."""
    if m < 1:
        raise ValueError("m must be at least 1")
    valid = [t for t in universe_tasks if scores[t.id].validity == 1.0]
    valid.sort(key=lambda t: (-scores[t.id].promise, t.id))
    return valid[:m]


# ---------------------------------------------------------------------------
# utility

@dataclass(frozen=True)
class UtilityWeights:
    """Non-negative weights over the seven ranking metrics; must sum to 1."""

    preference: float = 0.20
    business_value: float = 0.10
    sufficiency: float = 0.10
    accuracy: float = 0.35
    time_score: float = 0.05
    confidence: float = 0.10
    explainability: float = 0.10

    def __post_init__(self) -> None:
        values = (self.preference, self.business_value, self.sufficiency, self.accuracy,
                  self.time_score, self.confidence, self.explainability)
        if any(v < 0 for v in values):
            raise ValueError("utility weights must be non-negative")
        if abs(sum(values) - 1.0) > 1e-9:
            raise ValueError(f"utility weights must sum to 1, got {sum(values)}")


def score_utility(
    features: TaskFeatures,
    weights: UtilityWeights,
    model: RankingModel,
    business: float = 0.5,
) -> float:
    """Convex mix of the seven metrics; preference comes from the model."""
    if not features.has_metrics:
        raise MissingMetrics(f"task {features.task_id} has no evaluation metrics")
    v = features.vector
    components = {
        "preference": model.preference(features),
        "business_value": business,
        "sufficiency": v[_METRIC_BASE],
        "accuracy": v[_METRIC_BASE + 1],
        "confidence": v[_METRIC_BASE + 2],
        "explainability": v[_METRIC_BASE + 3],
        "time_score": v[_METRIC_BASE + 4],
    }
    return (
        weights.preference * components["preference"]
        + weights.business_value * components["business_value"]
        + weights.sufficiency * components["sufficiency"]
        + weights.accuracy * components["accuracy"]
        + weights.time_score * components["time_score"]
        + weights.confidence * components["confidence"]
        + weights.explainability * components["explainability"]
    )


# ---------------------------------------------------------------------------
# ranking and diversity

@dataclass(frozen=True)
class Recommendation:
    task: Task
    petel: str
    nl: str
    utility: float
    metrics: Mapping[str, float] = field(default_factory=dict)


def rank_static(
    tasks: Sequence[Task],
    utilities: Mapping[str, float],
    k: int,
    schema: Schema,
    metrics_by_id: Mapping[str, Mapping[str, float]] | None = None,
    rules: Sequence[ValidityRule] = (),
) -> list[Recommendation]:
    """Top-k by utility descending, ties broken by ascending task id."""
    if k < 1:
        raise ValueError("k must be at least 1")
    ordered = sorted(tasks, key=lambda t: (-utilities[t.id], t.id))
    out = []
    for task in ordered[:k]:
        out.append(
            Recommendation(
                task=task,
                petel=render_petel(task),
                nl=render_nl(task, schema, rules),
                utility=utilities[task.id],
                metrics=dict((metrics_by_id or {}).get(task.id, {})),
            )
        )
    return out


def diversity(a: Task, b: Task) -> float:
    """1 - Jaccard similarity of the two tasks' role-tagged signature sets."""
    sig_a, sig_b = a.signature(), b.signature()
    union = sig_a | sig_b
    if not union:
        return 0.0
    return 1.0 - len(sig_a & sig_b) / len(union)


def rerank_diverse(ranked: Sequence[Recommendation], lam: float, k: int) -> list[Recommendation]:
    """Greedy maximal-marginal-relevance over an already-ranked list.

    Each pick maximizes lam*utility + (1-lam)*min diversity to the picks so
    far; the first pick is the utility argmax, and lam=1 reproduces the
    static order exactly (same tie rule).
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must be in [0, 1]")
    if k < 1:
        raise ValueError("k must be at least 1")
    remaining = list(ranked)
    if not remaining:
        return []
    picked = [remaining.pop(0)]
    while remaining and len(picked) < k:
        def mmr(rec: Recommendation) -> float:
            spread = min(diversity(rec.task, p.task) for p in picked)
            return lam * rec.utility + (1.0 - lam) * spread

        best = sorted(remaining, key=lambda r: (-mmr(r), r.task.id))[0]
        remaining.remove(best)
        picked.append(best)
    return picked[:k]
