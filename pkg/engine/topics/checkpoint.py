"""Topic model checkpoint: phi CSV with a parameter header plus a vocabulary file."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, Tuple

import pandas as pd

from engine.errors import SchemaMismatchError, ValidationError
from engine.topics.lda import TopicModel
from engine.topics.vocabulary import Vocabulary
from engine.utils.csv_io import HASH_PREFIX

logger = logging.getLogger(__name__)

PHI_FILE = "topics_phi.csv"
VOCAB_FILE = "topics_vocab.txt"


def _header_line(model: TopicModel) -> str:
    return (
        f"# K={model.n_topics},alpha={model.alpha!r},beta={model.beta!r},"
        f"vocab_hash={model.vocabulary.hash}"
    )


def _parse_header(line: str) -> Dict[str, str]:
    if not line.startswith("# "):
        raise ValidationError("Topic checkpoint is missing its parameter header")
    fields = {}
    for part in line[2:].strip().split(","):
        key, _, value = part.partition("=")
        fields[key] = value
    return fields


def save_topic_model(model: TopicModel, directory: Path, config_hash: str = "") -> Tuple[Path, Path]:
    """Write ``topics_phi.csv`` and ``topics_vocab.txt`` into ``directory``.

    The phi file opens with the producing run's config-hash line, then the
    parameter header.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    vocab_path = model.vocabulary.save(directory / VOCAB_FILE)

    frame = pd.DataFrame(model.phi, columns=[f"t{j}" for j in range(model.phi.shape[1])])
    body = frame.to_csv(index=False, lineterminator="\n", float_format="%.17g")
    phi_path = directory / PHI_FILE
    phi_path.write_text(f"{HASH_PREFIX}{config_hash}\n" + _header_line(model) + "\n" + body, encoding="utf-8")
    logger.info("Saved %d-topic model over %d terms to %s", model.n_topics, len(model.vocabulary), directory)
    return phi_path, vocab_path


def load_topic_model(directory: Path) -> TopicModel:
    """Load a model saved by :func:`save_topic_model`.

    Raises:
        SchemaMismatchError: vocabulary file does not match the phi header
    """
    directory = Path(directory)
    phi_path = directory / PHI_FILE
    if not phi_path.exists():
        raise ValidationError(f"No topic model found in {directory}")
    with phi_path.open("r", encoding="utf-8") as handle:
        line = handle.readline()
        if line.startswith(HASH_PREFIX):
            line = handle.readline()
        header = _parse_header(line)

    vocabulary = Vocabulary.load(directory / VOCAB_FILE)
    if vocabulary.hash != header.get("vocab_hash"):
        raise SchemaMismatchError(header.get("vocab_hash", ""), vocabulary.hash, where=str(directory / VOCAB_FILE))

    phi = pd.read_csv(phi_path, comment="#", float_precision="round_trip").to_numpy(dtype="float64")
    if phi.shape[0] != int(header["K"]):
        raise ValidationError(f"Topic checkpoint declares K={header['K']} but holds {phi.shape[0]} rows")
    return TopicModel(phi=phi, alpha=float(header["alpha"]), beta=float(header["beta"]), vocabulary=vocabulary)
