"""Vocabulary: ordered term list with dense indices."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Mapping, Sequence

import numpy as np

from engine.config import MIN_DOCUMENT_FREQUENCY
from engine.errors import ValidationError
from engine.utils.hashing import names_hash

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple
    index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        terms = tuple(self.terms)
        if len(set(terms)) != len(terms):
            raise ValidationError("Vocabulary contains duplicate terms")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "index", {t: i for i, t in enumerate(terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    @property
    def hash(self) -> str:
        return names_hash(self.terms, prefix="vocab")

    def encode(self, counts: Mapping[str, int]) -> np.ndarray:
        """Expand a token-count map into word ids, sorted; unknown terms skipped."""
        ids = sorted((self.index[t], int(n)) for t, n in counts.items() if t in self.index and n > 0)
        if not ids:
            return np.zeros(0, dtype=np.int64)
        words, reps = zip(*ids)
        return np.repeat(np.asarray(words, dtype=np.int64), reps)

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("".join(f"{t}\n" for t in self.terms), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(terms=tuple(line for line in lines if line))


def build_vocabulary(
    corpus: Sequence[Mapping[str, int]],
    min_document_frequency: int = MIN_DOCUMENT_FREQUENCY,
) -> Vocabulary:
    """Keep terms that appear in at least ``min_document_frequency`` documents.

    Terms are sorted alphabetically so the vocabulary does not depend on
    document order.
    """
    doc_freq: Counter = Counter()
    for doc in corpus:
        doc_freq.update(t for t, n in doc.items() if n > 0)
    kept = sorted(t for t, df in doc_freq.items() if df >= min_document_frequency)
    if not kept:
        raise ValidationError(
            f"No term appears in {min_document_frequency} or more documents; vocabulary is empty"
        )
    logger.info(
        "Vocabulary: kept %d of %d terms (min document frequency %d)",
        len(kept), len(doc_freq), min_document_frequency,
    )
    return Vocabulary(terms=tuple(kept))
