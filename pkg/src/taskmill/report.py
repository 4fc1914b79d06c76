"""Run reports: a recommendations CSV plus rendered figures.

Figures land next to the delimited output in the chosen directory:
utility bars for the ranked list, a stacked view of each recommendation's
metric components, and the promise distribution over the whole universe.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .pipeline import MetricStore, Session
from .recommend import Recommendation

_COMPONENT_KEYS = ("accuracy", "confidence", "explainability", "sufficiency", "preference")


def write_recommendations_csv(recs: Sequence[Recommendation], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "task_id", "utility", "nl", "petel"])
        for i, rec in enumerate(recs, start=1):
            writer.writerow([i, rec.task.id, f"{rec.utility:.6f}", rec.nl,
                             rec.petel.replace("\n", " | ")])


def _utility_figure(recs: Sequence[Recommendation], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(8, 0.6 * len(recs) + 1.5))
    labels = [f"#{i + 1} {rec.task.id}" for i, rec in enumerate(recs)]
    ax.barh(labels[::-1], [r.utility for r in recs][::-1], color="#4878a8")
    ax.set_xlabel("utility")
    ax.set_xlim(0, 1)
    ax.set_title("Recommended tasks by utility")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _components_figure(recs: Sequence[Recommendation], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(9, 4.5))
    n = len(recs)
    width = 0.8 / len(_COMPONENT_KEYS)
    for j, key in enumerate(_COMPONENT_KEYS):
        xs = [i + j * width for i in range(n)]
        ys = [float(rec.metrics.get(key, 0.0)) for rec in recs]
        ax.bar(xs, ys, width=width, label=key)
    ax.set_xticks([i + 0.4 for i in range(n)])
    ax.set_xticklabels([f"#{i + 1}" for i in range(n)])
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.set_title("Metric components per recommendation")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _promise_figure(store: MetricStore, path: Path) -> None:
    promises = [r.promise["promise"] for r in store.view().values() if r.promise]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist(promises, bins=30, color="#6a9955", edgecolor="white")
    ax.set_xlabel("promise score")
    ax.set_ylabel("tasks")
    ax.set_title(f"Promise distribution over {len(promises)} scored tasks")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report(session: Session, out_dir: str | Path) -> list[Path]:
    """Write recommendations.csv and the figures; returns the created paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    created = []
    csv_path = out / "recommendations.csv"
    write_recommendations_csv(session.recommendations, csv_path)
    created.append(csv_path)
    if session.recommendations:
        fig_path = out / "utility_ranking.png"
        _utility_figure(session.recommendations, fig_path)
        created.append(fig_path)
        comp_path = out / "metric_components.png"
        _components_figure(session.recommendations, comp_path)
        created.append(comp_path)
    if len(session.store):
        promise_path = out / "promise_distribution.png"
        _promise_figure(session.store, promise_path)
        created.append(promise_path)
    return created
