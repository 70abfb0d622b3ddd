"""
Command-line entrypoint for ICUForge.

Usage:
  python run_icuforge.py <stage> --seed 7 [--workdir runs/demo] [--config run.cfg] [flags]

Stages:
  synth, fit-topics, featurize, window, train, evaluate,
  occlude, trajectories, hallucinate, report

Exit codes:
  0 success, 2 validation, 3 schema mismatch, 4 numeric divergence
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from engine.config import LOG_LEVEL
from engine.errors import IcuForgeError
from engine.feedback.fail_prompt_generator import generate_fail_prompt
from engine.orchestrator import STAGES, PipelineOrchestrator
from engine.run_config import build_run_config

# (flag, config key, type, help, stages); stages=None means every stage
Flag = Tuple[str, str, type, str, Optional[Tuple[str, ...]]]

_MODEL_STAGES = ("train", "evaluate", "occlude", "trajectories", "hallucinate", "report")
_FEATURE_STAGES = ("featurize", "window") + _MODEL_STAGES
_INTERPRET_STAGES = ("occlude", "trajectories", "hallucinate", "report")

FLAGS: List[Flag] = [
    ("--seed", "seed", int, "Global seed (required unless set in --config)", None),
    ("--workdir", "workdir", str, "Run folder holding every stage's artifacts", None),
    ("--cohort", "cohort", str, "Cohort file (default <workdir>/cohort/cohort.ndjson)", None),
    ("--intervention", "intervention", str, "vent, nivent, vaso, colbol or crysbol", _FEATURE_STAGES),
    ("--mode", "mode", str, "Feature mode: raw or words", _FEATURE_STAGES),
    ("--model", "model", str, "Model kind: lstm, cnn or lr", _MODEL_STAGES),
    # synth
    ("--out", "cohort", str, "Where to write the generated cohort", ("synth",)),
    ("--patients", "synth.n_patients", int, "Number of synthetic stays", ("synth",)),
    ("--min-hours", "synth.min_hours", int, "Shortest stay", ("synth",)),
    ("--max-hours", "synth.max_hours", int, "Longest stay", ("synth",)),
    ("--lead-hours", "synth.lead_hours", int, "Hours of driver shift before each onset", ("synth",)),
    ("--effect-size", "synth.effect_size", float, "Driver shift in standard deviations", ("synth",)),
    ("--driver-shape", "synth.driver_shape", str, "linear or threshold", ("synth",)),
    ("--note-rate", "synth.note_rate", float, "Per-hour probability of a routine note", ("synth",)),
    # topics
    ("--topics", "topics.n_topics", int, "Number of LDA topics", ("fit-topics", "featurize", "window") + _MODEL_STAGES),
    ("--iterations", "topics.iterations", int, "Gibbs sweeps", ("fit-topics",)),
    ("--min-df", "topics.min_document_frequency", int, "Vocabulary document-frequency floor", ("fit-topics",)),
    ("--fold-in", "topics.fold_in", int, "Fold-in sweeps per note", ("fit-topics", "featurize")),
    # window
    ("--lookback", "window.lookback", int, "Lookback hours", ("window",)),
    ("--gap", "window.gap", int, "Gap hours", ("window",)),
    ("--horizon", "window.horizon", int, "Prediction horizon hours", ("window",)),
    ("--stride", "window.stride", int, "Window stride hours", ("window",)),
    ("--split", "window.split_ratios", str, "Train,val,test ratios, e.g. 0.7,0.1,0.2", ("fit-topics",)),
    ("--shard-size", "window.shard_size", int, "Examples per shard", ("window",)),
    # train
    ("--batch-size", "train.batch_size", int, "Mini-batch size", ("train",)),
    ("--learning-rate", "train.learning_rate", float, "Adam learning rate", ("train",)),
    ("--l2", "train.l2", float, "L2 penalty on weight matrices", ("train",)),
    ("--patience", "train.patience", int, "Early-stopping patience in epochs", ("train",)),
    ("--max-epochs", "train.max_epochs", int, "Epoch cap", ("train",)),
    ("--hidden", "train.hidden", int, "LSTM hidden units per layer", ("train",)),
    ("--filters", "train.cnn_filters", int, "CNN filters per width", ("train",)),
    ("--fc-hidden", "train.fc_hidden", int, "CNN fully connected width", ("train",)),
    # interpret
    ("--class", "interpret.target_class", str, "Class to explain (onset, wean, stay_on, ...)", _INTERPRET_STAGES),
    ("--k", "interpret.k", int, "Examples per trajectory bundle", ("trajectories",)),
    ("--steps", "interpret.steps", int, "Activation-maximization steps", ("hallucinate",)),
    ("--step-size", "interpret.step_size", float, "Activation-maximization step size", ("hallucinate",)),
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="ICUForge intervention prediction pipeline")
    subparsers = parser.add_subparsers(dest="stage", required=True, metavar="stage")
    for stage in STAGES:
        sub = subparsers.add_parser(stage, help=f"Run the {stage} stage")
        sub.add_argument("--config", help="Flat key = value config file; flags override it")
        sub.add_argument("--log-level", default=LOG_LEVEL, help="Root log level (default from ICUFORGE_LOG_LEVEL)")
        for flag, key, kind, text, stages in FLAGS:
            if stages is None or stage in stages:
                sub.add_argument(flag, dest=key, type=kind, default=None, help=text)
    return parser


def overrides_from(args: argparse.Namespace) -> Dict[str, object]:
    """Flag values the user actually passed, keyed by config key."""
    values = vars(args)
    return {key: values[key] for _, key, _, _, _ in FLAGS if values.get(key) is not None}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=str(args.log_level).upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )

    print("=" * 60)
    print(f"ICUForge: {args.stage}")
    print("=" * 60)

    try:
        config = build_run_config(overrides_from(args), Path(args.config) if args.config else None)
    except IcuForgeError as e:
        print(generate_fail_prompt(args.stage, str(e), e.details, e.exit_code))
        return e.exit_code

    print(f"Workdir: {config.workdir}")
    print(f"Config hash: {config.hash}")
    print()

    orchestrator = PipelineOrchestrator(config)
    code = orchestrator.run(args.stage)

    print("=" * 60)
    print("Stage complete!" if code == 0 else f"Stage failed (exit code {code})")
    print("=" * 60)
    return code


if __name__ == "__main__":
    sys.exit(main())
