"""Report rendering: delimited output plus figures in one directory."""

from __future__ import annotations

import csv

from taskmill import Session, run_pipeline
from taskmill.report import render_report


def test_report_writes_csv_and_figures(toy_dataset, tmp_path):
    session = Session(id="report", dataset=toy_dataset, m=6, k=3, seed=0)
    run_pipeline(session)
    created = render_report(session, tmp_path / "out")
    names = {p.name for p in created}
    assert names == {
        "recommendations.csv",
        "utility_ranking.png",
        "metric_components.png",
        "promise_distribution.png",
    }
    for path in created:
        assert path.exists() and path.stat().st_size > 0

    with open(tmp_path / "out" / "recommendations.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["rank", "task_id", "utility", "nl", "petel"]
    assert len(rows) == 4
    assert [r[0] for r in rows[1:]] == ["1", "2", "3"]


def test_report_cli_round_trip(toy_csv_path, toy_schema_path, tmp_path, capsys):
    from taskmill.cli import main

    code = main([
        "report", "--data", str(toy_csv_path), "--schema", str(toy_schema_path),
        "--m", "5", "--k", "2", "--out-dir", str(tmp_path / "rep"),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "recommendations.csv" in out
    assert (tmp_path / "rep" / "utility_ranking.png").exists()
