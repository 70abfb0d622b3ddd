"""Patient-level train/validation/test split stratified by intervention history."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from engine.config import SPLIT_RATIOS, STRATIFICATION_TOLERANCE
from engine.errors import ValidationError
from engine.core.stay import PatientStay
from engine.core.variables import InterventionKind
from engine.utils.hashing import derive_seed

logger = logging.getLogger(__name__)

SPLIT_NAMES = ("train", "val", "test")
MIN_SPLIT_STAYS = 10


@dataclass(frozen=True)
class CohortSplit:
    train: Tuple[str, ...]
    val: Tuple[str, ...]
    test: Tuple[str, ...]
    seed: int = 0

    def parts(self) -> Dict[str, Tuple[str, ...]]:
        return {"train": self.train, "val": self.val, "test": self.test}

    def sizes(self) -> Dict[str, int]:
        return {name: len(ids) for name, ids in self.parts().items()}

    def to_json(self) -> str:
        return json.dumps(
            {"seed": self.seed, **{name: list(ids) for name, ids in self.parts().items()}},
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "CohortSplit":
        data = json.loads(text)
        return cls(
            train=tuple(data["train"]), val=tuple(data["val"]), test=tuple(data["test"]),
            seed=int(data.get("seed", 0)),
        )

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json() + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Path) -> "CohortSplit":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def outcome_signature(stay: PatientStay) -> int:
    """Bit k set iff the stay ever received the k-th intervention kind."""
    return sum(1 << k for k, kind in enumerate(InterventionKind) if stay.ever_received(kind))


def split_cohort(
    stays: Sequence[PatientStay],
    ratios: Tuple[float, float, float] = SPLIT_RATIOS,
    seed: int = 0,
) -> CohortSplit:
    """Partition stays into train/val/test.

    Stays are ordered by outcome signature, then by a per-stay key derived
    from (seed, stay id). Walking that order, each stay goes to the split
    whose running quota ``ratio * (i + 1) - count`` is largest, so every
    stratum is dealt out across the splits in proportion. Signatures mix
    several interventions, so a swap pass then trades stays between splits
    while that narrows the per-intervention gaps.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValidationError(f"Split ratios must be three non-negative numbers summing to 1, got {ratios}")
    ids = [s.stay_id for s in stays]
    if len(set(ids)) != len(ids):
        raise ValidationError("Stay ids must be unique before splitting")
    if len(stays) < MIN_SPLIT_STAYS:
        logger.warning(
            "Only %d stays; stratification is best-effort below %d", len(stays), MIN_SPLIT_STAYS
        )

    ordered = sorted(stays, key=lambda s: (outcome_signature(s), derive_seed(seed, s.stay_id)))
    assigned: List[List[str]] = [[], [], []]
    for i, stay in enumerate(ordered):
        deficits = [ratios[k] * (i + 1) - len(assigned[k]) for k in range(3)]
        target = max(range(3), key=lambda k: (deficits[k], -k))
        assigned[target].append(stay.stay_id)

    signatures = {s.stay_id: outcome_signature(s) for s in stays}
    assigned = _rebalance(assigned, signatures)
    position = {s.stay_id: i for i, s in enumerate(ordered)}
    split = CohortSplit(*(tuple(sorted(part, key=position.__getitem__)) for part in assigned), seed=seed)
    deviation = stratification_deviation(split, stays)
    if deviation > STRATIFICATION_TOLERANCE * 100:
        logger.warning("Stratification deviation %.2f pp exceeds tolerance", deviation)
    logger.info("Split sizes %s (max deviation %.2f pp)", split.sizes(), deviation)
    return split


def _signature_bits(signature: int) -> np.ndarray:
    return np.array([(signature >> k) & 1 for k in range(len(InterventionKind))], dtype=np.int64)


def _gap_score(counts: np.ndarray, sizes: np.ndarray) -> Tuple[float, float]:
    """(largest per-kind gap, summed gaps) between the non-empty splits' rates."""
    filled = sizes > 0
    if filled.sum() < 2:
        return 0.0, 0.0
    rates = counts[filled] / sizes[filled][:, None]
    gaps = rates.max(axis=0) - rates.min(axis=0)
    return float(gaps.max()), float(gaps.sum())


def _rebalance(assigned: List[List[str]], signatures: Dict[str, int]) -> List[List[str]]:
    """Swap stays of different signatures between splits while the gap score drops.

    Swaps keep every split's size. Candidates are visited in a fixed order and
    only a strict improvement is taken, so the result is deterministic.
    """
    pools: List[Dict[int, List[str]]] = []
    for part in assigned:
        pool: Dict[int, List[str]] = {}
        for sid in part:
            pool.setdefault(signatures[sid], []).append(sid)
        pools.append(pool)
    bits = {sig: _signature_bits(sig) for sig in set(signatures.values())}
    counts = np.array(
        [sum((bits[signatures[sid]] for sid in part), np.zeros(len(InterventionKind), dtype=np.int64))
         for part in assigned]
    )
    sizes = np.array([len(part) for part in assigned], dtype=np.float64)
    score = _gap_score(counts, sizes)

    swaps = 0
    for _ in range(max(1, len(signatures))):
        best = None
        for x, y in ((0, 1), (0, 2), (1, 2)):
            for a in sorted(pools[x]):
                for b in sorted(pools[y]):
                    if a == b or not pools[x][a] or not pools[y][b]:
                        continue
                    delta = bits[b] - bits[a]
                    counts[x] += delta
                    counts[y] -= delta
                    candidate = _gap_score(counts, sizes)
                    counts[x] -= delta
                    counts[y] += delta
                    if candidate < score and (best is None or candidate < best[0]):
                        best = (candidate, x, y, a, b)
        if best is None:
            break
        score, x, y, a, b = best
        moved_a, moved_b = pools[x][a].pop(), pools[y][b].pop()
        pools[y].setdefault(a, []).append(moved_a)
        pools[x].setdefault(b, []).append(moved_b)
        delta = bits[b] - bits[a]
        counts[x] += delta
        counts[y] -= delta
        swaps += 1
    logger.debug("Rebalanced split with %d swaps", swaps)
    return [[sid for sig in sorted(pool) for sid in pool[sig]] for pool in pools]


def stratification_deviation(split: CohortSplit, stays: Sequence[PatientStay]) -> float:
    """Largest gap, in percentage points, between splits' ever-received rates."""
    by_id = {s.stay_id: s for s in stays}
    worst = 0.0
    for kind in InterventionKind:
        rates = []
        for ids in split.parts().values():
            if ids:
                rates.append(sum(by_id[sid].ever_received(kind) for sid in ids) / len(ids))
        if rates:
            worst = max(worst, (max(rates) - min(rates)) * 100.0)
    return worst
