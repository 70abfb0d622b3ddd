"""Generate stage logs for successful pipeline stages.

Creates log_<stage>.txt with:
- Config hash of the run
- Artifacts written
- Warnings raised along the way
- Stage statistics

Logs carry no timestamps so identical runs produce identical logs.
"""

from typing import List, Mapping, Optional


def generate_log(
    stage: str,
    config_hash: str,
    artifacts: List[str],
    warnings: List[str],
    stats: Optional[Mapping[str, object]] = None,
) -> str:
    """Generate user-facing stage log.

    Args:
        stage: Subcommand name (synth, train, ...)
        config_hash: Hash of the RunConfig that produced the artifacts
        artifacts: Paths written by the stage
        warnings: Warnings raised during the stage
        stats: Key figures (counts, AUCs) in display order

    Returns:
        Formatted log text
    """
    lines = []

    # Header
    lines.append("=" * 60)
    lines.append(f"ICUForge Stage Log: {stage}")
    lines.append("=" * 60)
    lines.append(f"Config hash: {config_hash}")
    lines.append("")

    # Status
    if warnings:
        lines.append("STATUS: WEAK PASS (Warnings detected)")
    else:
        lines.append("STATUS: PASS (No issues)")
    lines.append("")

    if stats:
        lines.append("SUMMARY:")
        lines.append("-" * 60)
        for key, value in stats.items():
            lines.append(f"{key}: {value}")
        lines.append("")

    if artifacts:
        lines.append("ARTIFACTS:")
        lines.append("-" * 60)
        for i, artifact in enumerate(artifacts, 1):
            lines.append(f"{i}. {artifact}")
        lines.append("")

    if warnings:
        lines.append("WARNINGS:")
        lines.append("-" * 60)
        for i, warning in enumerate(warnings, 1):
            lines.append(f"{i}. {warning}")
        lines.append("")
        lines.append("Note: These warnings do not stop the pipeline,")
        lines.append("but downstream metrics may be less reliable.")
        lines.append("")

    # Footer
    lines.append("=" * 60)
    lines.append(f"Stage '{stage}' completed successfully!")
    lines.append("=" * 60)

    return "\n".join(lines) + "\n"
