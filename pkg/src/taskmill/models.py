"""Baseline learners standing in for the black-box model-search stage.

Three deterministic baselines (constant predictor, ridge regression via
normal equations, nearest centroid) are fitted on lag-aggregate features
of each example's history window. Evaluation uses a time-ordered 70/30
split, preserving temporal causality, and produces four per-task scores:
an accuracy-like score, the measured fit+predict seconds, a bootstrap
confidence score, and a fixed explainability score per model family.

An external model-search runner can replace this stage by producing the
same TaskMetrics shape.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .dataset import Dataset
from .errors import EmptyTrainingSet
from .labeling import Cutoff, TrainingSet, window_rows
from .petel import Task
from .schema import Schema

RIDGE_LAMBDA = 1e-3
BOOTSTRAP_RESAMPLES = 200
MIN_SPLIT_EXAMPLES = 10


class ModelKind(Enum):
    CONSTANT = "constant_baseline"
    RIDGE = "ridge_linear"
    CENTROID = "nearest_centroid"


EXPLAINABILITY = {ModelKind.CONSTANT: 1.0, ModelKind.RIDGE: 0.8, ModelKind.CENTROID: 0.6}

# kind preference order for score ties: most explainable first
_KIND_ORDER = (ModelKind.CONSTANT, ModelKind.RIDGE, ModelKind.CENTROID)


@dataclass(frozen=True)
class TaskMetrics:
    """Post-evaluation scores for one task."""

    accuracy: float
    train_seconds: float
    confidence: float
    explainability: float
    diagnostics: dict = field(default_factory=dict, compare=False)


def featurize_window(
    dataset: Dataset, cutoff: Cutoff, schema: Schema, history: int, entity: str | None = None
) -> np.ndarray:
    """Lag-aggregate features from [t-history, t) of the cutoff's entity.

    Per numerical attribute: count, sum, mean, min, max, and a presence
    flag (zeros with flag 0 when the window holds no values); plus the
    window's total row count as the last slot. Pass the entity attribute
    explicitly when the schema declares more than one.
    """
    rows = window_rows(dataset, entity or _entity_of(dataset, cutoff), cutoff.entity_value,
                       cutoff.t - history, cutoff.t)
    values: list[float] = []
    for attr in schema.numericals:
        present = [float(r[attr]) for r in rows if r.get(attr) is not None]
        if present:
            arr = np.asarray(present)
            values += [float(len(present)), float(arr.sum()), float(arr.mean()),
                       float(arr.min()), float(arr.max()), 1.0]
        else:
            values += [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
    values.append(float(len(rows)))
    return np.asarray(values)


def _entity_of(dataset: Dataset, cutoff: Cutoff) -> str:
    # the cutoff's entity attribute is whichever entity column holds its value;
    # callers that have the task at hand should prefer featurize_examples
    for name in dataset.schema.entities:
        col = dataset.columns[name]
        if any(c is not None and str(c) == cutoff.entity_value for c in col):
            return name
    return dataset.schema.entities[0]


def featurize_examples(ts: TrainingSet, dataset: Dataset, schema: Schema) -> np.ndarray:
    """Feature matrix for a training set, row-aligned with its examples."""
    history = ts.task.params.history
    rows = []
    for ex in ts.examples:
        window = window_rows(dataset, ts.task.entity, ex.cutoff.entity_value,
                             ex.cutoff.t - history, ex.cutoff.t)
        values: list[float] = []
        for attr in schema.numericals:
            present = [float(r[attr]) for r in window if r.get(attr) is not None]
            if present:
                arr = np.asarray(present)
                values += [float(len(present)), float(arr.sum()), float(arr.mean()),
                           float(arr.min()), float(arr.max()), 1.0]
            else:
                values += [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        values.append(float(len(window)))
        rows.append(values)
    return np.asarray(rows)


@dataclass(frozen=True)
class FittedModel:
    kind: ModelKind
    label_type: str
    constant: float | str | None = None
    coefficients: np.ndarray | None = None
    classes: tuple[str, ...] = ()
    centroids: np.ndarray | None = None

    def predict(self, x: np.ndarray) -> np.ndarray:
        if self.kind is ModelKind.CONSTANT:
            return np.full(len(x), self.constant, dtype=object if self.label_type == "categorical" else float)
        if self.kind is ModelKind.RIDGE:
            augmented = np.hstack([x, np.ones((len(x), 1))])
            return augmented @ self.coefficients
        distances = np.linalg.norm(x[:, None, :] - self.centroids[None, :, :], axis=2)
        picks = np.argmin(distances, axis=1)  # ties go to the first (sorted) class
        return np.asarray([self.classes[i] for i in picks], dtype=object)


def fit(kind: ModelKind, features: np.ndarray, labels: Sequence[float | str], label_type: str) -> FittedModel:
    """Fit one baseline; deterministic for identical inputs."""
    if len(labels) == 0:
        raise EmptyTrainingSet("cannot fit on zero examples")
    if kind is ModelKind.CONSTANT:
        if label_type == "numeric":
            return FittedModel(kind, label_type, constant=float(np.mean([float(l) for l in labels])))
        counts: dict[str, int] = {}
        for l in labels:
            counts[str(l)] = counts.get(str(l), 0) + 1
        majority = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
        return FittedModel(kind, label_type, constant=majority)
    if kind is ModelKind.RIDGE:
        if label_type != "numeric":
            raise ValueError("ridge regression needs numeric labels")
        x = np.hstack([features, np.ones((len(features), 1))])
        y = np.asarray([float(l) for l in labels])
        gram = x.T @ x + RIDGE_LAMBDA * np.eye(x.shape[1])
        coef = np.linalg.solve(gram, x.T @ y)
        return FittedModel(kind, label_type, coefficients=coef)
    if label_type != "categorical":
        raise ValueError("nearest centroid needs categorical labels")
    classes = sorted({str(l) for l in labels})
    centroids = np.vstack([
        np.asarray(features)[[str(l) == c for l in labels]].mean(axis=0) for c in classes
    ])
    return FittedModel(kind, label_type, classes=tuple(classes), centroids=centroids)


def accuracy_score(y_true: Sequence[str], y_pred: Sequence[str]) -> float:
    matches = sum(1 for a, b in zip(y_true, y_pred) if str(a) == str(b))
    return matches / len(y_true)


def r2_score(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    ss_tot = float(np.sum((y_true - np.mean(y_true)) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


def _score(label_type: str, y_true, y_pred) -> float:
    if label_type == "categorical":
        return accuracy_score(y_true, y_pred)
    return max(0.0, min(1.0, r2_score(y_true, y_pred)))


def bootstrap_confidence(
    y_true: Sequence, y_pred: Sequence, label_type: str,
    n_boot: int = BOOTSTRAP_RESAMPLES, seed: int = 0,
) -> tuple[float, float]:
    """Confidence = 1 minus the width of the seeded 90% bootstrap CI of the score."""
    rng = np.random.default_rng(seed)
    y_true = np.asarray(y_true, dtype=object)
    y_pred = np.asarray(y_pred, dtype=object)
    n = len(y_true)
    scores = []
    for _ in range(n_boot):
        idx = rng.integers(0, n, size=n)
        scores.append(_score(label_type, y_true[idx], y_pred[idx]))
    lo, hi = np.percentile(scores, [5.0, 95.0])
    width = float(hi - lo)
    return max(0.0, 1.0 - min(width, 1.0)), width


def _compatible_kinds(kinds: Sequence[ModelKind], label_type: str) -> list[ModelKind]:
    allowed = {
        "numeric": (ModelKind.CONSTANT, ModelKind.RIDGE),
        "categorical": (ModelKind.CONSTANT, ModelKind.CENTROID),
    }[label_type]
    return [k for k in _KIND_ORDER if k in kinds and k in allowed]


def evaluate_task(
    task: Task,
    ts: TrainingSet,
    dataset: Dataset,
    kinds: Sequence[ModelKind] = tuple(ModelKind),
    seed: int = 0,
    timer: Callable[[], float] = time.perf_counter,
) -> TaskMetrics:
    """Fit and score baselines on a time-ordered split; best test score wins.

    Fewer than MIN_SPLIT_EXAMPLES examples switches to leave-one-out
    scoring, flagged in the diagnostics. The timer is injectable so batch
    runs can substitute a deterministic clock.
    """
    if len(ts.examples) < 2:
        raise EmptyTrainingSet(f"task {task.id} has {len(ts.examples)} labeled examples, need 2")
    order = sorted(range(len(ts.examples)), key=lambda i: (ts.examples[i].cutoff.t,
                                                           ts.examples[i].cutoff.entity_value))
    examples = [ts.examples[i] for i in order]
    ordered_ts = TrainingSet(ts.task, tuple(examples), ts.label_type, ts.skipped)
    features = featurize_examples(ordered_ts, dataset, dataset.schema)
    labels = [ex.label for ex in examples]
    n = len(examples)
    use_loo = n < MIN_SPLIT_EXAMPLES
    candidates = _compatible_kinds(kinds, ts.label_type)
    if not candidates:
        raise ValueError("no model kind is compatible with the label type")

    best: tuple[float, ModelKind, list] | None = None
    elapsed = 0.0
    for kind in candidates:
        started = timer()
        if use_loo:
            preds: list = []
            for i in range(n):
                keep = [j for j in range(n) if j != i]
                model = fit(kind, features[keep], [labels[j] for j in keep], ts.label_type)
                preds.append(model.predict(features[i : i + 1])[0])
            truth = labels
        else:
            split = int(0.7 * n)
            model = fit(kind, features[:split], labels[:split], ts.label_type)
            preds = list(model.predict(features[split:]))
            truth = labels[split:]
        elapsed += timer() - started
        score = _score(ts.label_type, truth, preds)
        if best is None or score > best[0]:
            best = (score, kind, preds)

    score, winner, preds = best
    truth = labels if use_loo else labels[int(0.7 * n):]
    confidence, ci_width = bootstrap_confidence(truth, preds, ts.label_type, seed=seed)
    diagnostics = {
        "winner": winner.value,
        "loo": use_loo,
        "n_train": n if use_loo else int(0.7 * n),
        "n_test": n if use_loo else n - int(0.7 * n),
        "ci_width": ci_width,
    }
    if ts.label_type == "numeric":
        diagnostics["r2_raw"] = r2_score(np.asarray(truth, dtype=float),
                                         np.asarray(preds, dtype=float))
    return TaskMetrics(
        accuracy=score,
        train_seconds=elapsed,
        confidence=confidence,
        explainability=EXPLAINABILITY[winner],
        diagnostics=diagnostics,
    )
