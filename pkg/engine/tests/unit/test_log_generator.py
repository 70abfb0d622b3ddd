"""Test log generator."""

from engine.feedback.log_generator import generate_log


def test_generate_log_pass():
    """Test log generation for PASS status."""
    log = generate_log(
        stage="featurize",
        config_hash="abc123",
        artifacts=["features/stats.json", "features/vent_words.icuf"],
        warnings=[],
        stats={"Stays": 12, "Feature width": 285},
    )

    assert "ICUForge Stage Log: featurize" in log
    assert "Config hash: abc123" in log
    assert "STATUS: PASS" in log
    assert "1. features/stats.json" in log
    assert "Stays: 12" in log
    assert "WARNINGS:" not in log


def test_generate_log_weak_pass():
    """Test log generation for WEAK_PASS status."""
    log = generate_log(
        stage="evaluate",
        config_hash="abc123",
        artifacts=["metrics/vent_words_lstm.csv"],
        warnings=["Evaluation set lacks classes ['wean']; report is partial"],
    )

    assert "STATUS: WEAK PASS" in log
    assert "WARNINGS:" in log
    assert "lacks classes" in log
    assert "SUMMARY:" not in log


def test_generate_log_has_no_timestamp():
    """Test that identical inputs give identical logs."""
    first = generate_log("train", "h", ["models/a.icuf"], [], {"Epochs": 3})
    second = generate_log("train", "h", ["models/a.icuf"], [], {"Epochs": 3})
    assert first == second
    assert first.endswith("\n")


if __name__ == "__main__":
    test_generate_log_pass()
    test_generate_log_weak_pass()
    test_generate_log_has_no_timestamp()
    print("✓ Log generator tests passed")
