"""Command-line interface.

Subcommands: ingest, enumerate, engineer, evaluate, recommend, report,
serve, export-model, import-model. Exit codes: 0 success, 1 pipeline
error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .dataset import compute_stats, load_dataset, validate_dataset
from .enumeration import count_tasks, enumerate_tasks, write_universe
from .errors import EngineError
from .labeling import assess_sufficiency, build_training_set, export_training_set
from .models import ModelKind, evaluate_task
from .petel import (
    SearchParams,
    Task,
    parse_duration,
    parse_petel,
    render_nl,
    render_petel_inline,
)
from .pipeline import Session, persist_store, recommendations_json, run_pipeline
from .recommend import RankingModel, export_model, import_model
from .report import render_report
from .schema import Schema, infer_schema


def _load_schema(args: argparse.Namespace) -> Schema:
    if args.schema:
        return Schema.load(args.schema)
    return infer_schema(args.data)


def _params(args: argparse.Namespace) -> SearchParams:
    return SearchParams(
        window=parse_duration(args.window),
        lead=parse_duration(args.lead),
        history=parse_duration(args.history),
    )


def _session(args: argparse.Namespace) -> Session:
    schema = _load_schema(args)
    dataset = load_dataset(args.data, schema)
    model = RankingModel()
    if getattr(args, "model", None):
        model = import_model(Path(args.model).read_text(encoding="utf-8"))
    return Session(
        id="cli",
        dataset=dataset,
        params=_params(args),
        m=args.m,
        k=args.k,
        lam=args.lam,
        seed=args.seed,
        model=model,
    )


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="CSV event table")
    p.add_argument("--schema", help="schema sidecar JSON (inferred when omitted)")


def _add_param_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window", default="1d", help="prediction window, e.g. 1d, 6h, 30m")
    p.add_argument("--lead", default="0d", help="gap between cutoff and window start")
    p.add_argument("--history", default="7d", help="feature look-back")


def _unit_interval(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return value


def _add_pipeline_args(p: argparse.ArgumentParser) -> None:
    _add_data_args(p)
    _add_param_args(p)
    p.add_argument("--m", type=int, default=20, help="promising tasks to evaluate")
    p.add_argument("--k", type=int, default=5, help="recommendations to return")
    p.add_argument("--lambda", dest="lam", type=_unit_interval, default=1.0,
                   help="diversity trade-off, 1.0 = pure utility order")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--store", help="append run records to this JSONL metric store")
    p.add_argument("--model", help="warm-start ranker blob to import")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taskmill",
                                     description="Generate, screen, and recommend prediction tasks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a table and print a health report")
    _add_data_args(p)

    p = sub.add_parser("enumerate", help="list or count the task universe")
    _add_data_args(p)
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--out", help="write the universe as JSONL")

    p = sub.add_parser("engineer", help="build labeled examples for one task")
    _add_data_args(p)
    _add_param_args(p)
    p.add_argument("--task", required=True, help="task text, e.g. 'Entity: X, Filter: NONE, ...'")
    p.add_argument("--out", required=True, help="CSV output path")

    p = sub.add_parser("evaluate", help="run the baseline models on one task")
    _add_data_args(p)
    _add_param_args(p)
    p.add_argument("--task", required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("recommend", help="full pipeline; prints the ranked table")
    _add_pipeline_args(p)
    p.add_argument("--json", action="store_true", help="print JSON instead of the table")

    p = sub.add_parser("report", help="full pipeline; writes CSV and figures")
    _add_pipeline_args(p)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--ui-dir", help="static directory to mount at /ui")

    p = sub.add_parser("export-model", help="write a ranker blob (fresh unless --model given)")
    p.add_argument("--model", help="existing blob to re-export")
    p.add_argument("--out", required=True)

    p = sub.add_parser("import-model", help="validate a ranker blob")
    p.add_argument("--in", dest="blob_path", required=True)

    return parser


def _cmd_ingest(args: argparse.Namespace) -> int:
    schema = _load_schema(args)
    dataset = load_dataset(args.data, schema)
    report = validate_dataset(dataset)
    print(f"rows: {report.row_count} (dropped {dataset.load_report.rows_dropped})")
    print(f"time span: {report.time_span_seconds} s")
    for attr, rate in sorted(report.missing_rates.items()):
        flag = "  <-- high missing rate" if rate >= 0.5 else ""
        print(f"  {attr}: missing {rate:.1%}{flag}")
    for attr in schema.numericals:
        stats = compute_stats(dataset, attr)
        if stats.count_present:
            print(f"  {attr}: min {stats.minimum:g} q50 {stats.q50:g} max {stats.maximum:g}")
    return 0


def _cmd_enumerate(args: argparse.Namespace) -> int:
    schema = _load_schema(args)
    if args.count_only:
        print(count_tasks(schema))
        return 0
    universe = enumerate_tasks(schema)
    if args.out:
        write_universe(universe, args.out)
        print(f"wrote {universe.n} tasks to {args.out}")
    else:
        for task in universe.tasks:
            print(f"{task.id}  {render_petel_inline(task)}")
    return 0


def _parse_task(args: argparse.Namespace) -> Task:
    task = parse_petel(args.task)
    if "Params:" not in args.task:
        task = replace(task, params=_params(args))
    return task


def _cmd_engineer(args: argparse.Namespace) -> int:
    schema = _load_schema(args)
    dataset = load_dataset(args.data, schema)
    task = _parse_task(args)
    ts = build_training_set(task, dataset)
    manifest = Path(args.out).with_suffix(".manifest.json")
    export_training_set(ts, args.out, manifest)
    sufficiency = assess_sufficiency(ts)
    print(f"examples: {len(ts.examples)}  skipped: {ts.skipped}  sufficiency: {sufficiency.score:.3f}")
    print(f"wrote {args.out} and {manifest}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    schema = _load_schema(args)
    dataset = load_dataset(args.data, schema)
    task = _parse_task(args)
    ts = build_training_set(task, dataset)
    metrics = evaluate_task(task, ts, dataset, tuple(ModelKind), seed=args.seed)
    print(json.dumps({
        "task_id": task.id,
        "nl": render_nl(task, schema),
        "accuracy": metrics.accuracy,
        "train_seconds": metrics.train_seconds,
        "confidence": metrics.confidence,
        "explainability": metrics.explainability,
        "diagnostics": metrics.diagnostics,
    }, indent=2, sort_keys=True))
    return 0


def _run_session(args: argparse.Namespace) -> Session:
    session = _session(args)
    run_pipeline(session)
    if args.store:
        persist_store(session.store, args.store)
    return session


def _cmd_recommend(args: argparse.Namespace) -> int:
    session = _run_session(args)
    if args.json:
        print(recommendations_json(session.recommendations))
        return 0
    print(f"{'rank':<5} {'utility':<8} NL / PeTEL")
    for i, rec in enumerate(session.recommendations, start=1):
        print(f"{i:<5} {rec.utility:<8.4f} {rec.nl}")
        print(f"{'':<5} {'':<8} {render_petel_inline(rec.task)}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    session = _run_session(args)
    created = render_report(session, args.out_dir)
    for path in created:
        print(f"wrote {path}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .server import serve_http

    serve_http(host=args.host, port=args.port, ui_dir=args.ui_dir)
    return 0


def _cmd_export_model(args: argparse.Namespace) -> int:
    if args.model:
        model = import_model(Path(args.model).read_text(encoding="utf-8"))
    else:
        model = RankingModel()
    Path(args.out).write_text(export_model(model) + "\n", encoding="utf-8")
    print(f"wrote {args.out}")
    return 0


def _cmd_import_model(args: argparse.Namespace) -> int:
    blob = Path(args.blob_path).read_text(encoding="utf-8")
    model = import_model(blob)
    nonzero = sum(1 for w in model.weights if w != 0.0)
    print(f"valid model blob: eta={model.eta} nonzero_weights={nonzero}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "enumerate": _cmd_enumerate,
    "engineer": _cmd_engineer,
    "evaluate": _cmd_evaluate,
    "recommend": _cmd_recommend,
    "report": _cmd_report,
    "serve": _cmd_serve,
    "export-model": _cmd_export_model,
    "import-model": _cmd_import_model,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
