"""Note tokenization."""

from __future__ import annotations

import re
from collections import Counter
from typing import Dict

STOP_WORDS = frozenset(
    """
    a about above after again against all am an and any are as at be because been
    before being below between both but by can did do does doing down during each
    few for from further had has have having he her here hers him his how if in
    into is it its itself just me more most my no nor not now of off on once only
    or other our out over own per pt same she should so some such than that the
    their them then there these they this those through to too under until up
    very was we were what when where which while who whom why will with you your
    """.split()
)

_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> Dict[str, int]:
    """Lowercase, split on non-alphanumerics, drop short tokens and stop words.

    Returns:
        Token-count map in first-occurrence order
    """
    tokens = [
        tok for tok in _SPLIT.split(text.lower())
        if len(tok) >= 2 and tok not in STOP_WORDS
    ]
    return dict(Counter(tokens))
