"""Main orchestrator for the ICUForge pipeline.

This module coordinates the stages behind every subcommand:
1. synth         - generate a planted-signal cohort and its manifest
2. fit-topics    - select and split the cohort, fit LDA on training notes
3. featurize     - normalization statistics and per-stay feature matrices
4. window        - sliding-window examples written as shards per split
5. train         - fit one model with early stopping on the validation split
6. evaluate      - per-class test AUCs and the macro average
7. occlude       - feature occlusion ranking
8. trajectories  - top/bottom example trajectories
9. hallucinate   - activation maximization
10. report       - AUC grid, class proportions, topic words and figures

The orchestrator is the only component that performs file I/O in user directories.
All other modules work with in-memory data structures.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable, Dict, List

import pandas as pd

from .core.variables import InterventionKind
from .core.cohort import read_cohort, select_cohort, write_cohort
from .core.stay import PatientStay
from .errors import IcuForgeError, SchemaMismatchError, ValidationError
from .features.assemble import assemble, read_matrices, write_matrices
from .features.schema import GROUP_TOPICS, FeatureSchema, build_schema
from .features.stats import compute_stats, save_stats
from .feedback.fail_prompt_generator import generate_fail_prompt
from .feedback.log_generator import generate_log
from .interpret.activation_max import activation_maximize, write_hallucination_csv
from .interpret.occlusion import rank_features, write_occlusion_csv
from .interpret.trajectories import extreme_examples, most_differentiated_features, write_trajectories_csv
from .models.checkpoint import load_checkpoint, save_checkpoint
from .models.config import ModelConfig
from .models.factory import build_model
from .packaging.folder_creator import create_run_folder, write_file
from .rendering import styles
from .rendering.report_doc import ReportContent, ReportRenderer, TopicWords
from .rendering.svg_plots import plot_hallucination, plot_occlusion, plot_trajectories
from .run_config import RunConfig
from .synth.config import SynthConfig
from .synth.generator import audit_drivers, generate, write_manifest
from .topics.checkpoint import load_topic_model, save_topic_model
from .topics.lda import fit_lda, perplexity, top_words
from .training.metrics import EvalReport, evaluate, format_auc_table, read_metrics_csv, write_metrics_csv
from .training.trainer import TrainConfig, train, write_history_csv
from .utils.csv_io import read_csv, write_csv
from .utils.file_utils import scan_directory
from .validation.validator import CohortValidator, ValidationStatus
from .windowing.labels import LabelScheme, class_counts, class_proportions, proportions_frame
from .windowing.shards import read_shards, write_shards
from .windowing.split import CohortSplit, split_cohort, stratification_deviation
from .windowing.windows import ExampleSet, WindowConfig, stack_examples, windows_for_cohort

logger = logging.getLogger(__name__)

STAGES = (
    "synth",
    "fit-topics",
    "featurize",
    "window",
    "train",
    "evaluate",
    "occlude",
    "trajectories",
    "hallucinate",
    "report",
)

PROPORTIONS_FILE = "proportions.csv"
STATS_FILE = "stats.json"


class _WarningCollector(logging.Handler):
    """Collect WARNING records raised while a stage runs."""

    def __init__(self) -> None:
        super().__init__(level=logging.WARNING)
        self.messages: List[str] = []

    def emit(self, record: logging.LogRecord) -> None:
        self.messages.append(record.getMessage())


class StageOutcome:
    """What one stage produced: artifact paths and summary figures."""

    def __init__(self) -> None:
        self.artifacts: List[Path] = []
        self.stats: Dict[str, object] = {}

    def add(self, path: Path) -> Path:
        self.artifacts.append(Path(path))
        return Path(path)


class PipelineOrchestrator:
    """Run pipeline stages against one run folder."""

    def __init__(self, config: RunConfig):
        """Initialize orchestrator with a validated run configuration.

        Args:
            config: RunConfig assembled from config file and flags
        """
        self.config = config
        self.workdir = create_run_folder(config.workdir)
        self.config_hash = config.hash
        self.validator = CohortValidator()
        self._stages: Dict[str, Callable[[StageOutcome], None]] = {
            "synth": self._synth,
            "fit-topics": self._fit_topics,
            "featurize": self._featurize,
            "window": self._window,
            "train": self._train,
            "evaluate": self._evaluate,
            "occlude": self._occlude,
            "trajectories": self._trajectories,
            "hallucinate": self._hallucinate,
            "report": self._report,
        }

    # ------------------------------------------------------------------
    # Stage driver
    # ------------------------------------------------------------------

    def run(self, stage: str) -> int:
        """Run one stage; write its log or failure report.

        Returns:
            Process exit code (0 on success)
        """
        if stage not in self._stages:
            raise ValidationError(f"Unknown stage '{stage}'; expected one of {list(STAGES)}")

        logger.info("Stage %s, config hash %s", stage, self.config_hash)
        collector = _WarningCollector()
        root = logging.getLogger()
        root.addHandler(collector)
        outcome = StageOutcome()
        try:
            self._stages[stage](outcome)
        except IcuForgeError as e:
            self._handle_failure(stage, str(e), e.details, e.exit_code)
            return e.exit_code
        except Exception as e:  # noqa: BLE001
            logger.exception("Stage %s crashed", stage)
            self._handle_failure(stage, f"{type(e).__name__}: {e}", [], 1)
            return 1
        finally:
            root.removeHandler(collector)

        self._handle_success(stage, outcome, collector.messages)
        return 0

    def _handle_success(self, stage: str, outcome: StageOutcome, warnings: List[str]) -> None:
        for path in outcome.artifacts:
            print(f"  -> Created: {self._display(path)}")

        log_content = generate_log(
            stage=stage,
            config_hash=self.config_hash,
            artifacts=[self._display(p) for p in outcome.artifacts],
            warnings=warnings,
            stats=outcome.stats,
        )
        log_filename = f"log_{stage}.txt"
        write_file(self.workdir, log_filename, log_content)
        print(f"  -> Created: {log_filename}")
        (self.workdir / f"{stage}_FAIL.txt").unlink(missing_ok=True)

    def _handle_failure(self, stage: str, message: str, errors: List[str], exit_code: int) -> None:
        """Handle stage failure by writing a failure report."""
        report = generate_fail_prompt(stage=stage, message=message, errors=errors, exit_code=exit_code)
        fail_filename = f"{stage}_FAIL.txt"
        write_file(self.workdir, fail_filename, report)
        print(f"  -> Error: {message}")
        print(f"  -> Created: {fail_filename}")

    def _display(self, path: Path) -> str:
        try:
            return str(Path(path).relative_to(self.workdir))
        except ValueError:
            return str(path)

    # ------------------------------------------------------------------
    # Shared loaders
    # ------------------------------------------------------------------

    @staticmethod
    def _require(path: Path, produced_by: str) -> Path:
        if not Path(path).exists():
            raise ValidationError(f"Missing input {path}; run '{produced_by}' first")
        return Path(path)

    def _selected_cohort(self) -> List[PatientStay]:
        stays = read_cohort(self._require(self.config.cohort_path, "synth"))
        result = self.validator.validate(stays)
        if result.status == ValidationStatus.FAIL:
            raise ValidationError("Cohort failed validation", result.errors)
        for warning in result.warnings:
            logger.warning(warning)
        kept, _ = select_cohort(stays)
        if not kept:
            raise ValidationError("No stays left after cohort selection")
        return kept

    def _split(self) -> CohortSplit:
        return CohortSplit.load(self._require(self.config.split_path, "fit-topics"))

    def _schema(self) -> FeatureSchema:
        return build_schema(self.config.mode, self.config.topics.n_topics)

    def _shard_dir(self) -> Path:
        return self.config.path("shards_dir") / self.config.feature_tag

    def _checkpoint_path(self) -> Path:
        return self.config.path("checkpoints_dir") / f"{self.config.model_tag}.icuf"

    def _examples(self, split_name: str) -> ExampleSet:
        directory = self._require(self._shard_dir(), "window")
        examples = read_shards(directory, split_name, expected_hash=self._schema().hash)
        if examples.kind is not self.config.kind:
            raise ValidationError(
                f"Shards in {directory} hold {examples.kind.value} examples, not {self.config.intervention}"
            )
        return examples

    def _model(self, examples: ExampleSet):
        return load_checkpoint(self._require(self._checkpoint_path(), "train"), expected_schema_hash=examples.schema_hash)

    def _class_index(self, scheme: LabelScheme) -> int:
        name = self.config.interpret.target_class
        if name not in scheme.classes:
            raise ValidationError(f"Class '{name}' not in {list(scheme.classes)}")
        return scheme.classes.index(name)

    # ------------------------------------------------------------------
    # Stages
    # ------------------------------------------------------------------

    def _synth(self, outcome: StageOutcome) -> None:
        settings = self.config.synth
        synth_config = SynthConfig(
            n_patients=settings.n_patients,
            min_hours=settings.min_hours,
            max_hours=settings.max_hours,
            lead_hours=settings.lead_hours,
            effect_size=settings.effect_size,
            driver_shape=settings.driver_shape,
            note_rate=settings.note_rate,
            seed=self.config.seed,
        )
        stays, manifest = generate(synth_config)
        violations = audit_drivers(stays, manifest)
        if violations:
            raise ValidationError("Generated cohort does not match its manifest", violations)
        result = self.validator.validate(stays)
        if result.status == ValidationStatus.FAIL:
            raise ValidationError("Generated cohort failed validation", result.errors)

        outcome.add(write_cohort(stays, self.config.cohort_path, self.config_hash))
        outcome.add(write_manifest(manifest, self.config.manifest_path))
        outcome.stats["Stays"] = len(stays)
        outcome.stats["Hours"] = sum(s.n_hours for s in stays)
        outcome.stats["Notes"] = sum(len(s.notes) for s in stays)

    def _fit_topics(self, outcome: StageOutcome) -> None:
        stays = self._selected_cohort()
        split = split_cohort(stays, self.config.window.split_ratios, self.config.seed)
        outcome.add(split.save(self.config.split_path))

        by_id = {s.stay_id: s for s in stays}
        train_notes = [counts for sid in split.train for _, counts in by_id[sid].notes if sum(counts.values()) > 0]
        held_out = [counts for sid in split.val for _, counts in by_id[sid].notes if sum(counts.values()) > 0]
        t = self.config.topics
        model = fit_lda(
            train_notes,
            n_topics=t.n_topics,
            beta=t.beta,
            iterations=t.iterations,
            seed=self.config.seed,
            min_document_frequency=t.min_document_frequency,
        )
        phi_path, vocab_path = save_topic_model(model, self.config.path("topics_dir"), self.config_hash)
        outcome.add(phi_path)
        outcome.add(vocab_path)

        outcome.stats["Split sizes"] = split.sizes()
        outcome.stats["Stratification deviation (pp)"] = f"{stratification_deviation(split, stays):.2f}"
        outcome.stats["Training notes"] = len(train_notes)
        outcome.stats["Vocabulary"] = len(model.vocabulary)
        if held_out:
            try:
                score = perplexity(model, held_out, t.fold_in, self.config.seed)
                outcome.stats["Validation perplexity"] = f"{score:.2f}"
            except ValidationError as e:
                logger.warning("Perplexity skipped: %s", e)

    def _featurize(self, outcome: StageOutcome) -> None:
        stays = self._selected_cohort()
        split = self._split()
        train_ids = set(split.train)
        stats = compute_stats([s for s in stays if s.stay_id in train_ids])
        topic_model = load_topic_model(self._require(self.config.path("topics_dir"), "fit-topics"))
        if topic_model.n_topics != self.config.topics.n_topics:
            raise SchemaMismatchError(
                f"{self.config.topics.n_topics} topics", f"{topic_model.n_topics} topics", where="topic model"
            )

        schema = self._schema()
        fold_in = self.config.topics.fold_in
        matrices = {
            stay.stay_id: assemble(
                stay, self.config.mode, stats, topic_model, self.config.kind,
                fold_in, self.config.seed, schema=schema,
            )
            for stay in stays
        }
        features_dir = self.config.path("features_dir")
        outcome.add(save_stats(stats, features_dir / STATS_FILE))
        outcome.add(write_matrices(matrices, features_dir / f"{self.config.feature_tag}.icuf", self.config_hash))
        outcome.stats["Stays"] = len(matrices)
        outcome.stats["Feature width"] = schema.width
        outcome.stats["Schema hash"] = schema.hash

    def _window(self, outcome: StageOutcome) -> None:
        stays = self._selected_cohort()
        split = self._split()
        bundle = self.config.path("features_dir") / f"{self.config.feature_tag}.icuf"
        schema = self._schema()
        matrices = read_matrices(self._require(bundle, "featurize"), expected_hash=schema.hash)
        w = self.config.window
        window_config = WindowConfig(w.lookback, w.gap, w.horizon, w.stride)
        scheme = LabelScheme.for_kind(self.config.kind)

        by_id = {s.stay_id: s for s in stays}
        directory = self._shard_dir()
        rows = []
        all_labels = []
        for split_name, ids in split.parts().items():
            part = [by_id[sid] for sid in ids if sid in by_id]
            examples = windows_for_cohort(matrices, part, self.config.kind, window_config)
            stacked = stack_examples(examples, schema.hash, self.config.kind, schema.width, w.lookback)
            for path in write_shards(stacked, directory, w.shard_size, self.config_hash, split_name):
                outcome.add(path)
            counts = class_counts(stacked.labels, scheme)
            rows.extend({"intervention": self.config.intervention, "split": split_name, "class": name,
                         "count": n} for name, n in counts.items())
            all_labels.extend(stacked.labels.tolist())
            outcome.stats[f"{split_name} examples"] = len(stacked)

        if all_labels:
            rows.extend({"intervention": self.config.intervention, "split": "all", "class": name,
                         "count": n} for name, n in class_counts(all_labels, scheme).items())
            proportions = class_proportions(all_labels, scheme)
            outcome.stats["Class proportions"] = {k: round(v, 4) for k, v in proportions.items()}
        outcome.add(directory / "manifest.csv")
        outcome.add(write_csv(pd.DataFrame(rows), directory / PROPORTIONS_FILE, self.config_hash))

    def _train(self, outcome: StageOutcome) -> None:
        train_set = self._examples("train")
        val_set = read_shards(self._shard_dir(), "val", expected_hash=train_set.schema_hash)
        t = self.config.train
        model_config = ModelConfig(
            kind=self.config.model,
            n_features=train_set.features.shape[2],
            n_classes=train_set.scheme.n_classes,
            lookback=train_set.features.shape[1],
            hidden=t.hidden,
            lstm_keep=t.lstm_keep,
            cnn_filters=t.cnn_filters,
            cnn_widths=t.cnn_widths,
            cnn_pool=t.cnn_pool,
            fc_hidden=t.fc_hidden,
            cnn_keep=t.cnn_keep,
            l2=t.l2,
            seed=self.config.seed,
        )
        model = build_model(model_config, train_set.schema_hash)
        history = train(
            model,
            train_set,
            val_set,
            TrainConfig(
                batch_size=t.batch_size,
                learning_rate=t.learning_rate,
                l2=t.l2,
                patience=t.patience,
                max_epochs=t.max_epochs,
                weighted=t.weighted,
                seed=self.config.seed,
            ),
        )
        checkpoints = self.config.path("checkpoints_dir")
        outcome.add(save_checkpoint(
            model, self._checkpoint_path(), self.config_hash,
            extra={"best_epoch": history.best_epoch, "intervention": self.config.intervention},
        ))
        outcome.add(write_history_csv(history, checkpoints / f"{self.config.model_tag}_history.csv", self.config_hash))
        outcome.stats["Parameters"] = model.n_parameters
        outcome.stats["Epochs"] = len(history.epochs)
        outcome.stats["Best epoch"] = history.best_epoch
        if history.best_val_macro_auc is not None:
            outcome.stats["Best validation macro AUC"] = f"{history.best_val_macro_auc:.4f}"

    def _evaluate(self, outcome: StageOutcome) -> None:
        test_set = self._examples("test")
        model = self._model(test_set)
        report = evaluate(model, test_set, self.config.model)
        metrics = self.config.path("metrics_dir")
        outcome.add(write_metrics_csv([report], metrics / f"{self.config.model_tag}.csv", self.config_hash))
        outcome.add(write_file(metrics, f"{self.config.model_tag}.json", report.to_json() + "\n"))
        for name in report.classes:
            outcome.stats[f"AUC {name}"] = report.formatted(name)
        outcome.stats["Macro AUC"] = report.formatted()

    def _occlude(self, outcome: StageOutcome) -> None:
        test_set = self._examples("test")
        model = self._model(test_set)
        schema = self._schema()
        scheme = test_set.scheme
        class_name = scheme.classes[self._class_index(scheme)]
        report = rank_features(model, test_set, schema, self.config.seed, rank_class=class_name)
        interpret = self.config.path("interpret_dir")
        csv_path = outcome.add(write_occlusion_csv(report, interpret / f"{self.config.model_tag}_occlusion.csv", self.config_hash))
        outcome.add(write_file(
            interpret, f"{self.config.model_tag}_occlusion.svg",
            plot_occlusion(read_csv(csv_path), class_name, title=f"{self.config.model_tag}: occlusion"),
        ))
        for position, (unit, delta) in enumerate(report.top(3), 1):
            outcome.stats[f"Rank {position}"] = f"{unit.name} ({'-' if delta is None else f'{delta:.4f}'})"

    def _trajectories(self, outcome: StageOutcome) -> None:
        test_set = self._examples("test")
        model = self._model(test_set)
        schema = self._schema()
        class_index = self._class_index(test_set.scheme)
        top, bottom = extreme_examples(model, test_set, class_index, schema.names, self.config.interpret.k)
        features = most_differentiated_features(top, bottom, styles.TRAJECTORY_FEATURES)
        interpret = self.config.path("interpret_dir")
        csv_path = outcome.add(write_trajectories_csv(
            [top, bottom], interpret / f"{self.config.model_tag}_trajectories.csv", self.config_hash,
        ))
        outcome.add(write_file(
            interpret, f"{self.config.model_tag}_trajectories.svg",
            plot_trajectories(read_csv(csv_path), features, title=f"{self.config.model_tag}: {self.config.interpret.target_class}"),
        ))
        outcome.stats["Examples per bundle"] = top.k
        outcome.stats["Most differentiated"] = ", ".join(features)

    def _hallucinate(self, outcome: StageOutcome) -> None:
        test_set = self._examples("test")
        model = self._model(test_set)
        schema = self._schema()
        class_index = self._class_index(test_set.scheme)
        result = activation_maximize(
            model, class_index, self.config.interpret.steps, self.config.interpret.step_size, self.config.seed,
        )
        interpret = self.config.path("interpret_dir")
        csv_path = outcome.add(write_hallucination_csv(
            result, schema.names, interpret / f"{self.config.model_tag}_hallucination.csv", self.config_hash,
        ))
        outcome.add(write_file(
            interpret, f"{self.config.model_tag}_hallucination.svg",
            plot_hallucination(read_csv(csv_path), title=f"{self.config.model_tag}: {self.config.interpret.target_class}"),
        ))
        outcome.stats["Initial logit"] = f"{result.trace[0]:.4f}"
        outcome.stats["Final logit"] = f"{result.objective:.4f}"

    def _report(self, outcome: StageOutcome) -> None:
        reports = self.config.path("reports_dir")
        notes: List[str] = []

        metric_files = scan_directory(self.config.path("metrics_dir"), "*.csv")
        frames = [read_metrics_csv(p) for p in metric_files]
        metrics = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()
        auc_table = format_auc_table(metrics)
        if not auc_table.empty:
            outcome.add(write_csv(auc_table, reports / "auc_table.csv", self.config_hash))
            for path in metric_files:
                report_json = path.with_suffix(".json")
                if report_json.exists() and EvalReport.from_json(report_json.read_text(encoding="utf-8")).is_partial:
                    notes.append(f"{path.stem}: some classes absent from the test set; macro AUC is partial")

        proportions = self._proportions_table()
        topic_words = self._topic_words(notes)

        figures: List[str] = []
        for path in scan_directory(self.config.path("interpret_dir"), "*.csv"):
            frame = read_csv(path)
            stem = path.stem
            if stem.endswith("_occlusion"):
                class_name = self.config.interpret.target_class
                if class_name not in set(frame["class"]):
                    class_name = str(frame["class"].iloc[0])
                svg = plot_occlusion(frame, class_name, title=f"{stem[:-len('_occlusion')]}: occlusion")
            elif stem.endswith("_trajectories"):
                svg = plot_trajectories(frame, title=stem[:-len("_trajectories")])
            elif stem.endswith("_hallucination"):
                svg = plot_hallucination(frame, title=stem[:-len("_hallucination")])
            else:
                continue
            outcome.add(write_file(reports, f"{stem}.svg", svg))
            figures.append(f"{stem}.svg")

        content = ReportContent(
            title=self.config.workdir.name or "icuforge",
            config_hash=self.config_hash,
            auc_table=auc_table,
            proportions=proportions,
            topic_words=topic_words,
            notes=notes,
            figures=figures,
        )
        renderer = ReportRenderer()
        outcome.add(write_file(reports, "summary.txt", renderer.render_text(content)))
        outcome.add(write_file(reports, "report.docx", renderer.render_docx(content)))
        outcome.stats["Metric files"] = len(metric_files)
        outcome.stats["Figures"] = len(figures)

    def _proportions_table(self):
        rows = {}
        for path in scan_directory(self.config.path("shards_dir"), PROPORTIONS_FILE):
            frame = read_csv(path)
            frame = frame[frame["split"] == "all"]
            if frame.empty:
                continue
            kind = str(frame["intervention"].iloc[0])
            total = frame["count"].sum()
            rows[kind] = {str(c): float(n) / total for c, n in zip(frame["class"], frame["count"])}
        ordered = {kind: rows[kind.value] for kind in InterventionKind if kind.value in rows}
        return proportions_frame(ordered) if ordered else pd.DataFrame()

    def _topic_words(self, notes: List[str]) -> List[TopicWords]:
        topics_dir = self.config.path("topics_dir")
        occlusion_path = self.config.path("interpret_dir") / f"{self.config.model_tag}_occlusion.csv"
        if not topics_dir.exists() or not occlusion_path.exists():
            return []
        model = load_topic_model(topics_dir)
        frame = read_csv(occlusion_path)
        frame = frame[(frame["group"] == GROUP_TOPICS) & (frame["class"] == self.config.interpret.target_class)]
        frame = frame.sort_values("rank", kind="stable").head(styles.REPORT_TOPICS)
        picked = []
        for name, delta in zip(frame["feature"], frame["delta_auc"]):
            topic = int(str(name).split("_", 1)[1])
            if topic >= model.n_topics:
                notes.append(f"{name}: not in the saved topic model")
                continue
            picked.append(TopicWords(
                topic=str(name),
                delta_auc=None if pd.isna(delta) else float(delta),
                words=tuple(top_words(model, topic, styles.REPORT_TOPIC_WORDS)),
            ))
        return picked

