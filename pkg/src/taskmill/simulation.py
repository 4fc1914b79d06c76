"""Seeded feedback-loop simulation for calibrating the ranker.

A hidden linear preference over the task feature layout plays the role of
the user: a task is "useful" when its hidden score clears a quantile of
the pool (the top quartile by default, which keeps the learned boundary
near the top of the ranking). Rounds of noiseless feedback on randomly
drawn tasks train the ranker; top-1 agreement tracks how often the
ranker's favourite task matches the hidden favourite over a trailing
window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .recommend import FEATURE_DIM, RankingModel, TaskFeatures, apply_feedback


@dataclass(frozen=True)
class SimulationResult:
    agreement: tuple[float, ...]
    rounds_to_target: int | None
    model: RankingModel


def hidden_preference(seed: int, scale: float = 2.0) -> tuple[float, ...]:
    rng = np.random.default_rng(seed)
    return tuple(float(w) for w in rng.normal(0.0, scale, size=FEATURE_DIM))


def _hidden_top(pool: Sequence[TaskFeatures], hidden: Sequence[float]) -> str:
    scored = sorted(
        pool, key=lambda f: (-sum(w * x for w, x in zip(hidden, f.vector)), f.task_id)
    )
    return scored[0].task_id


def _model_top(pool: Sequence[TaskFeatures], model: RankingModel) -> str:
    scored = sorted(pool, key=lambda f: (-model.decision(f), f.task_id))
    return scored[0].task_id


def simulate_feedback(
    pool: Sequence[TaskFeatures],
    hidden: Sequence[float],
    rounds: int,
    seed: int,
    model: RankingModel | None = None,
    target: float = 0.9,
    window: int = 50,
    useful_quantile: float = 0.75,
) -> SimulationResult:
    """Run seeded feedback rounds; report trailing-window top-1 agreement.

    ``rounds_to_target`` is the first round (1-based) at which the trailing
    agreement reaches the target, or None if it never does.
    """
    if model is None:
        model = RankingModel()
    rng = np.random.default_rng(seed)
    hidden_scores = [sum(w * x for w, x in zip(hidden, f.vector)) for f in pool]
    threshold = float(np.quantile(hidden_scores, useful_quantile))
    hidden_best = _hidden_top(pool, hidden)

    hits: list[int] = []
    agreement: list[float] = []
    rounds_to_target: int | None = None
    for r in range(rounds):
        pick = int(rng.integers(0, len(pool)))
        verdict = "useful" if hidden_scores[pick] > threshold else "not_useful"
        model = apply_feedback(model, pool[pick], verdict)
        hits.append(1 if _model_top(pool, model) == hidden_best else 0)
        trailing = hits[-window:]
        score = sum(trailing) / len(trailing)
        agreement.append(score)
        # only a full trailing window counts toward the target
        if rounds_to_target is None and len(trailing) == window and score >= target:
            rounds_to_target = r + 1
    return SimulationResult(
        agreement=tuple(agreement), rounds_to_target=rounds_to_target, model=model
    )
