"""Generate failure reports for stages that stop with an error.

Creates <stage>_FAIL.txt containing:
- The error and its exit code
- Numbered details and diagnostics
- What to check before re-running
"""

from typing import List

_HINTS = {
    2: [
        "Input files exist and were produced by the expected stage",
        "Cohort records follow engine/docs/COHORT_SCHEMA.md",
        "Every class of the label scheme is present in the training split",
        "Configuration values are within their documented ranges",
    ],
    3: [
        "Features, shards and checkpoints come from the same featurize run",
        "The feature mode (raw/words) and topic model match across stages",
        "Re-run the stages after the first mismatching artifact",
    ],
    4: [
        "Lower the learning rate or the activation-maximization step size",
        "Check the feature matrix for extreme values",
        "Reproduce with the same seed and a smaller batch to isolate the batch",
    ],
}


def generate_fail_prompt(
    stage: str,
    message: str,
    errors: List[str],
    exit_code: int,
) -> str:
    """Generate the failure report for one stage.

    Args:
        stage: Subcommand that failed
        message: Main error message
        errors: Detail lines (rule violations, diagnostics)
        exit_code: Process exit code the CLI returns

    Returns:
        Formatted report text
    """
    lines = []

    # Error report
    lines.append("=" * 60)
    lines.append(f"STAGE FAILED: {stage}")
    lines.append("=" * 60)
    lines.append("")
    lines.append(f"Exit code: {exit_code}")
    lines.append(f"Error: {message}")
    lines.append("")

    if errors:
        lines.append("DETAILS:")
        for i, error in enumerate(errors, 1):
            lines.append(f"{i}. {error}")
        lines.append("")

    hints = _HINTS.get(exit_code)
    if hints:
        lines.append("=" * 60)
        lines.append("WHAT TO CHECK")
        lines.append("=" * 60)
        lines.append("")
        for hint in hints:
            lines.append(f"  - {hint}")
        lines.append("")

    return "\n".join(lines)
