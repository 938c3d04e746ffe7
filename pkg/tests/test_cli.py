import json
import subprocess

import numpy as np
import pytest

from conftest import tiny_pipeline_config, write_tiny_corpus
from graphtopics import write_partition_csv
from graphtopics.cli import main
from graphtopics.pipeline import STAGES


@pytest.fixture
def workspace(tmp_path):
    corpus_path = tmp_path / "corpus.jsonl"
    write_tiny_corpus(corpus_path)
    out = tmp_path / "out"
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(tiny_pipeline_config(corpus_path, out)))
    return cfg_path, out


def _manifest(out):
    with open(out / "manifest.json", encoding="utf-8") as fh:
        return json.load(fh)


class TestRunVerb:
    def test_full_run(self, workspace):
        cfg_path, out = workspace
        assert main(["run", "--config", str(cfg_path)]) == 0
        assert (out / "evaluation.json").exists()
        assert (out / "sankey.json").exists()
        assert _manifest(out)["status"] == "ok"

    def test_missing_config_flag(self, capsys):
        assert main(["run"]) == 2
        assert "--config is required" in capsys.readouterr().err

    def test_bad_config_file(self, tmp_path, capsys):
        missing = tmp_path / "absent.json"
        assert main(["run", "--config", str(missing)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_seed_and_out_overrides(self, workspace, tmp_path):
        cfg_path, _ = workspace
        alt = tmp_path / "alt_out"
        code = main(
            ["run", "--config", str(cfg_path), "--seed", "9", "--out", str(alt)]
        )
        assert code == 0
        manifest = _manifest(alt)
        assert manifest["config"]["seed"] == 9
        assert manifest["config"]["out_dir"] == str(alt)

    def test_jobs_override_recorded(self, workspace):
        cfg_path, out = workspace
        assert main(["run", "--config", str(cfg_path), "--jobs", "2"]) == 0
        assert _manifest(out)["config"]["n_jobs"] == 2


class TestStageVerbs:
    def test_stages_run_one_at_a_time(self, workspace):
        cfg_path, out = workspace
        for stage in STAGES:
            assert main([stage, "--config", str(cfg_path)]) == 0, stage
        manifest = _manifest(out)
        # the last invocation ran only the export stage
        assert manifest["stages"]["export"]["result"] == "ran"
        assert manifest["stages"]["scan"]["result"] == "not run"
        assert (out / "sankey.json").exists()
        assert (out / "evaluation.json").exists()

    def test_stage_out_of_order_fails(self, workspace, capsys):
        cfg_path, _ = workspace
        assert main(["select", "--config", str(cfg_path)]) == 3
        assert "stage 'select' failed" in capsys.readouterr().err

    def test_force_flag(self, workspace):
        cfg_path, out = workspace
        assert main(["ingest", "--config", str(cfg_path)]) == 0
        assert main(["ingest", "--config", str(cfg_path)]) == 0
        assert _manifest(out)["stages"]["ingest"]["result"] == "cached"
        assert main(["ingest", "--config", str(cfg_path), "--force"]) == 0
        assert _manifest(out)["stages"]["ingest"]["result"] == "ran"


class TestCompareVerb:
    def test_table_output(self, tmp_path, capsys):
        ids = [f"d{i}" for i in range(6)]
        write_partition_csv(tmp_path / "a.csv", ids, np.array([0, 0, 1, 1, 2, 2]))
        write_partition_csv(tmp_path / "b.csv", ids, np.array([0, 0, 0, 1, 1, 1]))
        code = main(["compare", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "pair\tnmi\tari\tvi"
        name, nmi, ari, vi = lines[1].split("\t")
        assert name == "a vs b"
        for value in (nmi, ari, vi):
            float(value)

    def test_three_files_all_pairs(self, tmp_path, capsys):
        ids = ["d0", "d1", "d2", "d3"]
        for stem, labels in (("a", [0, 0, 1, 1]), ("b", [0, 1, 0, 1]),
                             ("c", [0, 1, 2, 3])):
            write_partition_csv(tmp_path / f"{stem}.csv", ids, np.array(labels))
        paths = [str(tmp_path / f"{s}.csv") for s in ("a", "b", "c")]
        assert main(["compare", *paths]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 4
        assert [ln.split("\t")[0] for ln in lines[1:]] == [
            "a vs b", "a vs c", "b vs c",
        ]

    def test_identity_pair_values(self, tmp_path, capsys):
        ids = ["d0", "d1", "d2"]
        write_partition_csv(tmp_path / "a.csv", ids, np.array([0, 1, 1]))
        write_partition_csv(tmp_path / "b.csv", ids, np.array([5, 2, 2]))
        assert main(["compare", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")]) == 0
        row = capsys.readouterr().out.splitlines()[1].split("\t")
        assert row[1:] == ["1.000000", "1.000000", "0.000000"]

    def test_scores_written_with_out(self, tmp_path, capsys):
        ids = ["d0", "d1", "d2", "d3"]
        write_partition_csv(tmp_path / "a.csv", ids, np.array([0, 0, 1, 1]))
        write_partition_csv(tmp_path / "b.csv", ids, np.array([0, 1, 1, 1]))
        scores = tmp_path / "scores"
        code = main([
            "compare", str(tmp_path / "a.csv"), str(tmp_path / "b.csv"),
            "--out", str(scores),
        ])
        assert code == 0
        capsys.readouterr()
        for metric in ("nmi", "ari", "vi"):
            assert (scores / f"compare_{metric}.csv").exists()

    def test_mismatched_ids_fail(self, tmp_path, capsys):
        write_partition_csv(tmp_path / "a.csv", ["d0", "d1"], np.array([0, 1]))
        write_partition_csv(tmp_path / "b.csv", ["d0", "d9"], np.array([0, 1]))
        code = main(["compare", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")])
        assert code == 3
        assert "compare failed" in capsys.readouterr().err


class TestParser:
    def test_unknown_verb_exits(self):
        with pytest.raises(SystemExit) as exc:
            main(["polish"])
        assert exc.value.code == 2

    def test_verb_required(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_console_script_help(self):
        proc = subprocess.run(
            ["graphtopics", "--help"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        for verb in ("run", "compare", "scan", "select"):
            assert verb in proc.stdout
