"""CLI subcommands, exit codes, and outputs."""

from __future__ import annotations

import json

import pytest

from taskmill.cli import main


def run_cli(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def paths(toy_csv_path, toy_schema_path):
    return str(toy_csv_path), str(toy_schema_path)


class TestUsage:
    def test_unknown_flag_exits_2(self, paths):
        with pytest.raises(SystemExit) as err:
            main(["recommend", "--data", paths[0], "--bogus"])
        assert err.value.code == 2

    def test_missing_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 2

    def test_pipeline_error_exits_1(self, capsys, tmp_path, paths):
        missing = tmp_path / "missing.csv"
        code, _out, err = run_cli(capsys, "ingest", "--data", str(missing), "--schema", paths[1])
        assert code == 1
        assert "error" in err


class TestCommands:
    def test_ingest_reports_rows(self, capsys, paths):
        code, out, _ = run_cli(capsys, "ingest", "--data", paths[0], "--schema", paths[1])
        assert code == 0
        assert out.startswith("rows: 533 (dropped 0)")

    def test_enumerate_count_only(self, capsys, paths):
        code, out, _ = run_cli(capsys, "enumerate", "--data", paths[0], "--schema", paths[1],
                               "--count-only")
        assert code == 0
        assert out.strip() == "198"

    def test_enumerate_jsonl(self, capsys, tmp_path, paths):
        out_path = tmp_path / "universe.jsonl"
        code, _out, _ = run_cli(capsys, "enumerate", "--data", paths[0], "--schema", paths[1],
                                "--out", str(out_path))
        assert code == 0
        lines = out_path.read_text().strip().split("\n")
        assert len(lines) == 198

    def test_engineer_writes_csv_and_manifest(self, capsys, tmp_path, paths):
        out_path = tmp_path / "train.csv"
        code, out, _ = run_cli(
            capsys, "engineer", "--data", paths[0], "--schema", paths[1],
            "--task", "Entity: AIRLINE, Filter: NONE, Aggregator: max_agg(<ARRIVAL_DELAY>)",
            "--out", str(out_path),
        )
        assert code == 0
        assert out_path.exists()
        manifest = json.loads(out_path.with_suffix(".manifest.json").read_text())
        assert manifest["label_type"] == "numeric"

    def test_evaluate_prints_metrics_json(self, capsys, paths):
        code, out, _ = run_cli(
            capsys, "evaluate", "--data", paths[0], "--schema", paths[1],
            "--task", "Entity: AIRLINE, Filter: NONE, Aggregator: count_agg(None)",
        )
        assert code == 0
        doc = json.loads(out)
        assert 0.0 <= doc["accuracy"] <= 1.0
        assert doc["nl"].startswith("For each <AIRLINE> predict the number of records")

    def test_recommend_prints_table(self, capsys, paths):
        code, out, _ = run_cli(
            capsys, "recommend", "--data", paths[0], "--schema", paths[1],
            "--m", "6", "--k", "3",
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0].startswith("rank")
        assert len(lines) == 1 + 2 * 3  # header + (nl, petel) per row

    def test_recommend_json_and_store(self, capsys, tmp_path, paths):
        store = tmp_path / "store.jsonl"
        code, out, _ = run_cli(
            capsys, "recommend", "--data", paths[0], "--schema", paths[1],
            "--m", "6", "--k", "3", "--json", "--store", str(store),
        )
        assert code == 0
        doc = json.loads(out)
        assert len(doc["recommendations"]) == 3
        assert store.exists() and len(store.read_text().strip().split("\n")) >= 6

    def test_enumerate_with_inferred_schema(self, capsys, tmp_path):
        # an id-like column (distinct ratio > 0.5) infers as entity
        lines = ["DATE,DEVICE,STATUS,READING"]
        for i in range(40):
            lines.append(f"2015-01-{i % 28 + 1:02d},unit-{i % 25:02d},{'ok' if i % 2 else 'warn'},{i * 1.5}")
        path = tmp_path / "devices.csv"
        path.write_text("\n".join(lines) + "\n")
        code, out, _ = run_cli(capsys, "enumerate", "--data", str(path), "--count-only")
        assert code == 0
        assert int(out.strip()) > 0

    def test_export_then_import_model(self, capsys, tmp_path):
        blob_path = tmp_path / "model.json"
        code, _out, _ = run_cli(capsys, "export-model", "--out", str(blob_path))
        assert code == 0
        code, out, _ = run_cli(capsys, "import-model", "--in", str(blob_path))
        assert code == 0
        assert "valid model blob" in out

    def test_recommend_with_warm_model(self, capsys, tmp_path, paths):
        blob_path = tmp_path / "model.json"
        run_cli(capsys, "export-model", "--out", str(blob_path))
        code, _out, _ = run_cli(
            capsys, "recommend", "--data", paths[0], "--schema", paths[1],
            "--m", "4", "--k", "2", "--model", str(blob_path),
        )
        assert code == 0
