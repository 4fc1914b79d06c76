"""taskmill: generate, screen, and interactively recommend prediction tasks.

Given an event-driven time-series table, the engine enumerates candidate
prediction tasks in a small expression language, validates and labels
them, scores their promise and utility with baseline learners, and ranks
recommendations that a domain expert can steer with useful/not-useful
feedback.
"""

from .dataset import (
    AttributeStats,
    Dataset,
    LoadReport,
    ValidationReport,
    compute_stats,
    load_dataset,
    nearest_rank_quantile,
    validate_dataset,
)
from .enumeration import OpConfig, TaskUniverse, count_tasks, enumerate_tasks, instantiate_thresholds
from .errors import EngineError
from .labeling import (
    Cutoff,
    LabeledExample,
    SufficiencyReport,
    TrainingSet,
    assess_sufficiency,
    build_training_set,
    compute_label,
    generate_cutoffs,
)
from .models import FittedModel, ModelKind, TaskMetrics, evaluate_task, featurize_window, fit
from .petel import (
    AggExpr,
    AggOp,
    AttrRef,
    FilterExpr,
    FilterOp,
    SearchParams,
    Task,
    ValidityResult,
    ValidityRule,
    check_validity,
    parse_petel,
    render_nl,
    render_petel,
)
from .pipeline import MetricStore, Session, load_store, persist_store, run_pipeline
from .recommend import (
    FEATURE_DIM,
    FeedbackEvent,
    PromiseScore,
    RankingModel,
    Recommendation,
    TaskFeatures,
    UtilityWeights,
    apply_feedback,
    diversity,
    export_model,
    featurize_task,
    import_model,
    rank_static,
    rerank_diverse,
    score_promise,
    score_utility,
    select_promising,
)
from .schema import AttributeKind, Schema, infer_schema

__version__ = "0.1.0"
