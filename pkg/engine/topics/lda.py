"""Latent Dirichlet Allocation by collapsed Gibbs sampling.

Documents are processed in a canonical order (by content hash) and each
document draws from its own generator seeded by (seed, content hash), so a
fit does not depend on the order the corpus arrives in.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from engine.config import FOLD_IN_SWEEPS, GIBBS_SWEEPS, MIN_DOCUMENT_FREQUENCY, N_TOPICS, TOPIC_BETA
from engine.errors import ValidationError
from engine.topics.vocabulary import Vocabulary, build_vocabulary
from engine.utils.hashing import counts_hash, derive_seed

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TopicModel:
    """Fitted topic model.

    Attributes:
        phi: K x |vocabulary| topic-term distributions
        alpha: Symmetric document-topic prior
        beta: Symmetric topic-term prior
        vocabulary: Term index used by ``phi``
    """

    phi: np.ndarray
    alpha: float
    beta: float
    vocabulary: Vocabulary

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.beta <= 0:
            raise ValidationError(f"Topic priors must be positive (alpha={self.alpha}, beta={self.beta})")
        if self.phi.shape[1] != len(self.vocabulary):
            raise ValidationError(
                f"phi has {self.phi.shape[1]} columns but the vocabulary has {len(self.vocabulary)} terms"
            )
        sums = self.phi.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > ROW_SUM_TOLERANCE):
            raise ValidationError("Every phi row must sum to 1")
        phi = np.array(self.phi, dtype=np.float64)
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def n_topics(self) -> int:
        return int(self.phi.shape[0])


def default_alpha(n_topics: int) -> float:
    return 50.0 / n_topics


def _draw(weights: np.ndarray, u: float) -> int:
    cumulative = np.cumsum(weights)
    k = int(np.searchsorted(cumulative, u * cumulative[-1], side="right"))
    return min(k, len(weights) - 1)


def fit_lda(
    corpus: Sequence[Mapping[str, int]],
    n_topics: int = N_TOPICS,
    alpha: Optional[float] = None,
    beta: float = TOPIC_BETA,
    iterations: int = GIBBS_SWEEPS,
    seed: int = 0,
    vocabulary: Optional[Vocabulary] = None,
    min_document_frequency: int = MIN_DOCUMENT_FREQUENCY,
) -> TopicModel:
    """Fit LDA with collapsed Gibbs sampling.

    Args:
        corpus: Token-count maps, one per note
        n_topics: K
        alpha: Document-topic prior (default 50/K)
        beta: Topic-term prior
        iterations: Full Gibbs sweeps; no convergence test
        seed: Global seed
        vocabulary: Fixed vocabulary; built from ``corpus`` when omitted
        min_document_frequency: Pruning threshold when building the vocabulary

    Raises:
        ValidationError: empty corpus or a document without tokens
    """
    if not corpus:
        raise ValidationError("Cannot fit a topic model on an empty corpus")
    for i, doc in enumerate(corpus):
        if sum(doc.values()) <= 0:
            raise ValidationError(f"Document {i} has no tokens")
    if n_topics < 1:
        raise ValidationError(f"Topic count must be >= 1, got {n_topics}")

    alpha = default_alpha(n_topics) if alpha is None else float(alpha)
    vocab = vocabulary or build_vocabulary(corpus, min_document_frequency)
    n_terms = len(vocab)

    keyed = sorted((counts_hash(doc), i) for i, doc in enumerate(corpus))
    documents: List[np.ndarray] = []
    generators = []
    skipped = 0
    for key, i in keyed:
        words = vocab.encode(corpus[i])
        if words.size == 0:
            skipped += 1
            continue
        documents.append(words)
        generators.append(np.random.default_rng(derive_seed(seed, key)))
    if skipped:
        logger.warning("%d document(s) have no in-vocabulary tokens and were skipped", skipped)
    if not documents:
        raise ValidationError("No document has in-vocabulary tokens")

    n_dk = np.zeros((len(documents), n_topics))
    n_wk = np.zeros((n_terms, n_topics))
    n_k = np.zeros(n_topics)
    assignments = []
    for d, (words, rng) in enumerate(zip(documents, generators)):
        z = rng.integers(0, n_topics, size=words.size)
        assignments.append(z)
        np.add.at(n_dk[d], z, 1)
        np.add.at(n_wk, (words, z), 1)
        np.add.at(n_k, z, 1)

    n_tokens = int(sum(w.size for w in documents))
    logger.info(
        "Fitting LDA: K=%d, %d documents, %d tokens, %d terms, %d sweeps",
        n_topics, len(documents), n_tokens, n_terms, iterations,
    )
    v_beta = n_terms * beta
    for sweep in range(iterations):
        for d, (words, z, rng) in enumerate(zip(documents, assignments, generators)):
            draws = rng.random(words.size)
            doc_counts = n_dk[d]
            for i, w in enumerate(words):
                k = z[i]
                doc_counts[k] -= 1
                n_wk[w, k] -= 1
                n_k[k] -= 1
                weights = (doc_counts + alpha) * (n_wk[w] + beta) / (n_k + v_beta)
                k = _draw(weights, draws[i])
                z[i] = k
                doc_counts[k] += 1
                n_wk[w, k] += 1
                n_k[k] += 1
        if (sweep + 1) % 50 == 0:
            logger.debug("Gibbs sweep %d/%d", sweep + 1, iterations)

    phi = (n_wk.T + beta) / (n_k[:, None] + v_beta)
    return TopicModel(phi=phi, alpha=alpha, beta=beta, vocabulary=vocab)


def infer_topics(
    model: TopicModel,
    note: Mapping[str, int],
    fold_in_iterations: int = FOLD_IN_SWEEPS,
    seed: int = 0,
) -> np.ndarray:
    """Topic proportions of one note by fold-in Gibbs with phi frozen.

    Terms outside the vocabulary are skipped; a note with no known terms
    gets the prior-only (uniform) distribution. Counts from the second half
    of the sweeps are averaged.
    """
    K = model.n_topics
    words = model.vocabulary.encode(note)
    if words.size == 0:
        return np.full(K, 1.0 / K)

    rng = np.random.default_rng(derive_seed(seed, counts_hash(note)))
    z = rng.integers(0, K, size=words.size)
    n_dk = np.bincount(z, minlength=K).astype(np.float64)
    word_phi = model.phi[:, words].T

    burn_in = fold_in_iterations // 2
    accumulated = np.zeros(K)
    kept = 0
    for sweep in range(max(fold_in_iterations, 1)):
        draws = rng.random(words.size)
        for i in range(words.size):
            n_dk[z[i]] -= 1
            k = _draw((n_dk + model.alpha) * word_phi[i], draws[i])
            z[i] = k
            n_dk[k] += 1
        if sweep >= burn_in:
            accumulated += n_dk
            kept += 1

    mean_counts = accumulated / kept
    return (mean_counts + model.alpha) / (words.size + K * model.alpha)


def top_words(model: TopicModel, topic: int, n: int) -> List[str]:
    """The ``n`` most probable terms of ``topic``; ties go to the lower index."""
    if not 0 <= topic < model.n_topics:
        raise ValidationError(f"Topic {topic} out of range [0, {model.n_topics})")
    order = np.argsort(-model.phi[topic], kind="stable")
    return [model.vocabulary.terms[i] for i in order[: max(n, 0)]]


def perplexity(
    model: TopicModel,
    corpus: Sequence[Mapping[str, int]],
    fold_in_iterations: int = FOLD_IN_SWEEPS,
    seed: int = 0,
) -> float:
    """Held-out perplexity over in-vocabulary tokens.

    The uniform term model scores exactly ``len(model.vocabulary)``.
    """
    log_phi = np.log(model.phi)
    total = 0.0
    n_tokens = 0
    for doc in corpus:
        words = model.vocabulary.encode(doc)
        if words.size == 0:
            continue
        theta = infer_topics(model, doc, fold_in_iterations, seed)
        token_ll = logsumexp(np.log(theta)[:, None] + log_phi[:, words], axis=0)
        total += float(token_ll.sum())
        n_tokens += words.size
    if n_tokens == 0:
        raise ValidationError("Held-out corpus has no in-vocabulary tokens")
    return float(np.exp(-total / n_tokens))
