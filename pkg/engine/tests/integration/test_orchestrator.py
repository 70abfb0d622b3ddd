"""Integration tests for the stage pipeline driven through the CLI."""

import tempfile
from pathlib import Path

import pytest

from engine.config import RUN_SLOW
from engine.utils.csv_io import read_config_hash, read_csv
from run_icuforge import main

SMOKE_CONFIG = """\
# tiny settings so every stage runs in seconds
seed = 11
topics.n_topics = 3
topics.iterations = 5
topics.fold_in = 2
topics.min_document_frequency = 1
train.hidden = 4
train.max_epochs = 1
train.batch_size = 64
train.weighted = false
interpret.steps = 3
interpret.k = 3
interpret.target_class = stay_off
"""

SMOKE_STAGES = [
    ["synth", "--patients", "60", "--min-hours", "24", "--max-hours", "36"],
    ["fit-topics"],
    ["featurize"],
    ["window"],
    ["train"],
    ["evaluate"],
    ["occlude"],
    ["trajectories"],
    ["hallucinate"],
    ["report"],
]


def run_stage(workdir: Path, config: Path, argv):
    return main([argv[0], "--workdir", str(workdir), "--config", str(config), *argv[1:]])


def test_full_pipeline():
    """Test all ten stages on a tiny synthetic cohort."""
    with tempfile.TemporaryDirectory() as tmpdir:
        tmpdir = Path(tmpdir)
        workdir = tmpdir / "run"
        config = tmpdir / "run.cfg"
        config.write_text(SMOKE_CONFIG, encoding="utf-8")

        for argv in SMOKE_STAGES:
            assert run_stage(workdir, config, argv) == 0, argv[0]
            assert (workdir / f"log_{argv[0]}.txt").exists(), argv[0]
            assert not (workdir / f"{argv[0]}_FAIL.txt").exists()

        assert (workdir / "cohort" / "cohort.ndjson").exists()
        assert (workdir / "cohort" / "cohort.manifest.json").exists()
        assert (workdir / "features" / "vent_words.icuf").exists()
        assert (workdir / "models" / "vent_words_lstm.icuf").exists()

        metrics_path = workdir / "metrics" / "vent_words_lstm.csv"
        metrics = read_csv(metrics_path)
        assert metrics["class"].tolist() == ["onset", "wean", "stay_on", "stay_off", "macro"]
        hash_line = read_config_hash(metrics_path)
        assert hash_line and hash_line in (workdir / "log_evaluate.txt").read_text(encoding="utf-8")
        cohort_hash = read_config_hash(workdir / "cohort" / "cohort.ndjson")
        assert cohort_hash and cohort_hash in (workdir / "log_synth.txt").read_text(encoding="utf-8")
        assert read_config_hash(workdir / "topics" / "topics_phi.csv") == hash_line

        occlusion = read_csv(workdir / "interpret" / "vent_words_lstm_occlusion.csv")
        assert occlusion["rank"].max() == 29 + 3 + 15 + 2
        for name in ("occlusion", "trajectories", "hallucination"):
            assert (workdir / "interpret" / f"vent_words_lstm_{name}.svg").exists()

        report = workdir / "report"
        assert (report / "report.docx").read_bytes()[:2] == b"PK"
        assert "Ventilation" in (report / "summary.txt").read_text(encoding="utf-8")
        assert (report / "auc_table.csv").exists()

        # a different topic count rebuilds a different schema than the shards carry
        assert run_stage(workdir, config, ["train", "--topics", "4"]) == 3
        assert (workdir / "train_FAIL.txt").exists()
        # success clears an earlier failure report
        assert run_stage(workdir, config, ["train"]) == 0
        assert not (workdir / "train_FAIL.txt").exists()


def artifact_bytes(workdir: Path):
    return {
        str(path.relative_to(workdir)): path.read_bytes()
        for path in sorted(workdir.rglob("*"))
        if path.is_file() and not path.name.startswith("log_")
    }


def test_same_seed_runs_are_byte_identical():
    """Test that two full runs with one seed write identical checkpoints, metrics and reports."""
    with tempfile.TemporaryDirectory() as tmpdir:
        tmpdir = Path(tmpdir)
        config = tmpdir / "run.cfg"
        config.write_text(SMOKE_CONFIG, encoding="utf-8")
        runs = []
        for parent in ("first", "second"):
            # same folder name so the report title matches
            workdir = tmpdir / parent / "run"
            for argv in SMOKE_STAGES:
                assert run_stage(workdir, config, argv) == 0, argv[0]
            runs.append(workdir)

        first, second = (artifact_bytes(w) for w in runs)
        for name in (
            "cohort/cohort.ndjson",
            "topics/topics_phi.csv",
            "models/vent_words_lstm.icuf",
            "metrics/vent_words_lstm.csv",
            "report/report.docx",
            "report/summary.txt",
        ):
            assert name in first
        assert first.keys() == second.keys()
        for name, content in first.items():
            assert content == second[name], name
        assert sorted(p.name for p in runs[0].glob("log_*.txt")) == sorted(p.name for p in runs[1].glob("log_*.txt"))


def test_missing_input_is_validation_failure():
    with tempfile.TemporaryDirectory() as tmpdir:
        tmpdir = Path(tmpdir)
        config = tmpdir / "run.cfg"
        config.write_text(SMOKE_CONFIG, encoding="utf-8")
        assert run_stage(tmpdir / "empty", config, ["evaluate"]) == 2
        fail = (tmpdir / "empty" / "evaluate_FAIL.txt").read_text(encoding="utf-8")
        assert "window" in fail


def test_invalid_flag_value_exits_2():
    with tempfile.TemporaryDirectory() as tmpdir:
        assert main(["synth", "--workdir", tmpdir, "--seed", "1", "--patients", "0"]) == 2


def test_missing_seed_exits_2():
    with tempfile.TemporaryDirectory() as tmpdir:
        assert main(["synth", "--workdir", tmpdir]) == 2


ACCEPTANCE_CONFIG = """\
seed = 3
synth.n_patients = 1000
synth.driver_shape = {shape}
topics.n_topics = 20
topics.iterations = 50
topics.fold_in = 10
train.hidden = 32
train.cnn_filters = 16
train.fc_hidden = 32
train.max_epochs = 15
interpret.target_class = onset
"""


def run_model(workdir: Path, config: Path, model: str) -> float:
    for stage in ("train", "evaluate"):
        assert run_stage(workdir, config, [stage, "--model", model]) == 0, (stage, model)
    metrics = read_csv(workdir / "metrics" / f"vent_words_{model}.csv")
    return float(metrics.loc[metrics["class"] == "onset", "auc"].iloc[0])


@pytest.mark.skipif(not RUN_SLOW, reason="set ICUFORGE_RUN_SLOW=1 for desk-scale acceptance runs")
def test_acceptance_planted_signal():
    """Test onset AUC, the gain over the linear baseline and occlusion of the planted driver."""
    with tempfile.TemporaryDirectory() as tmpdir:
        tmpdir = Path(tmpdir)
        workdir = tmpdir / "run"
        config = tmpdir / "run.cfg"
        config.write_text(ACCEPTANCE_CONFIG.format(shape="threshold"), encoding="utf-8")
        for stage in ("synth", "fit-topics", "featurize", "window"):
            assert run_stage(workdir, config, [stage]) == 0, stage

        aucs = {model: run_model(workdir, config, model) for model in ("lr", "lstm", "cnn")}
        assert aucs["lstm"] >= 0.85
        assert aucs["cnn"] >= 0.85
        assert aucs["lstm"] - aucs["lr"] >= 0.03
        assert aucs["cnn"] - aucs["lr"] >= 0.03

        assert run_stage(workdir, config, ["occlude", "--model", "lstm"]) == 0
        occlusion = read_csv(workdir / "interpret" / "vent_words_lstm_occlusion.csv")
        onset = occlusion[occlusion["class"] == "onset"].set_index("feature")
        assert onset.loc["resp_rate", "rank"] <= 3
        assert onset.loc["resp_rate", "delta_auc"] >= 0.1
        for noise in ("weight", "inr", "magnesium"):
            assert abs(onset.loc[noise, "delta_auc"]) <= 0.02
