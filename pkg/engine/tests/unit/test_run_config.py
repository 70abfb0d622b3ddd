"""Unit tests for run configuration parsing, hashing and CLI flags."""

import tempfile
from pathlib import Path

import pytest

from engine.errors import ValidationError
from engine.run_config import build_run_config, parse_config_text
from run_icuforge import build_parser, overrides_from


def test_parse_config_text():
    """Test comments, blank lines and whitespace around '='."""
    text = "seed = 7  # run seed\n\n# full-line comment\ntrain.batch_size=64\n"
    assert parse_config_text(text) == {"seed": "7", "train.batch_size": "64"}


def test_parse_config_text_errors():
    with pytest.raises(ValidationError) as info:
        parse_config_text("seed = 1\nseed = 2\nnonsense\n")
    assert len(info.value.details) == 2
    assert "repeated" in info.value.details[0]
    assert "line 3" in info.value.details[1]


def test_dotted_keys_reach_sections():
    config = build_run_config({"seed": 3, "train.cnn_widths": "2,3", "window.split_ratios": "0.6,0.2,0.2"})
    assert config.train.cnn_widths == (2, 3)
    assert config.window.split_ratios == (0.6, 0.2, 0.2)
    assert config.topics.n_topics == 50
    assert config.train.hidden == 512


def test_config_file_then_overrides():
    """Test that flags override file values."""
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / "run.cfg"
        path.write_text("seed = 5\ntrain.weighted = false\nmodel = cnn\n", encoding="utf-8")
        config = build_run_config({"model": "lr", "intervention": None}, path)
    assert config.seed == 5
    assert config.train.weighted is False
    assert config.model == "lr"
    assert config.intervention == "vent"


def test_missing_config_file():
    with pytest.raises(ValidationError):
        build_run_config({"seed": 1}, Path("does/not/exist.cfg"))


@pytest.mark.parametrize("overrides", [
    {},
    {"seed": 1, "train.batch_size": 0},
    {"seed": 1, "intervention": "dialysis"},
    {"seed": 1, "model": "gru"},
    {"seed": 1, "colour": "blue"},
    {"seed": 1, "train.lstm_keep": 1.5},
])
def test_invalid_values_are_validation_errors(overrides):
    with pytest.raises(ValidationError) as info:
        build_run_config(overrides)
    assert info.value.exit_code == 2


def test_hash_ignores_paths():
    """Test that moving a run folder keeps its hash and changing a setting does not."""
    a = build_run_config({"seed": 1, "workdir": "runs/a"})
    b = build_run_config({"seed": 1, "workdir": "elsewhere/b", "cohort": "x.ndjson"})
    c = build_run_config({"seed": 2, "workdir": "runs/a"})
    assert a.hash == b.hash
    assert a.hash != c.hash


def test_resolved_paths():
    config = build_run_config({"seed": 1, "workdir": "runs/demo", "mode": "RAW", "intervention": "VASO"})
    assert config.cohort_path == Path("runs/demo/cohort/cohort.ndjson")
    assert config.manifest_path == Path("runs/demo/cohort/cohort.manifest.json")
    assert config.path("shards_dir") == Path("runs/demo/shards")
    assert config.model_tag == "vaso_raw_lstm"


def test_cli_flags_become_dotted_overrides():
    args = build_parser().parse_args(["train", "--seed", "3", "--max-epochs", "2", "--model", "cnn"])
    assert args.stage == "train"
    assert overrides_from(args) == {"seed": 3, "model": "cnn", "train.max_epochs": 2}


def test_cli_rejects_flags_of_other_stages():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["synth", "--seed", "1", "--max-epochs", "2"])
