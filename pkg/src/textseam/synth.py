"""Synthetic boundary-labeled corpora for demos and end-to-end checks.

Human prefixes and machine suffixes draw from vocabularies built over
disjoint letter pools, so even character n-grams never collide; boundary
positions are uniform over the whole 0-100% range.
"""

from __future__ import annotations

import numpy as np

from .dataio import TextRecord

_HUMAN_LETTERS = "abcdefghiklm"
_MACHINE_LETTERS = "nopqrstuvwxyz"


def _make_vocab(rng: np.random.Generator, letters: str, size: int) -> list[str]:
    pool = list(letters)
    words = []
    for _ in range(size):
        length = int(rng.integers(3, 9))
        words.append("".join(rng.choice(pool, size=length)))
    return words


def make_synthetic_records(
    count: int,
    seed: int,
    min_words: int = 40,
    max_words: int = 120,
    vocab_size: int = 60,
    id_prefix: str = "syn",
) -> list[TextRecord]:
    """Generate boundary-labeled records with disjoint source vocabularies."""
    rng = np.random.default_rng(seed)
    human_vocab = _make_vocab(rng, _HUMAN_LETTERS, vocab_size)
    machine_vocab = _make_vocab(rng, _MACHINE_LETTERS, vocab_size)

    records = []
    for i in range(count):
        n = int(rng.integers(min_words, max_words + 1))
        label = int(rng.integers(0, n + 1))
        words = [
            str(rng.choice(human_vocab)) if w < label else str(rng.choice(machine_vocab))
            for w in range(n)
        ]
        # sprinkle sentence terminators so sentence metrics are meaningful
        position = 0
        while position < n:
            position += int(rng.integers(6, 15))
            end = min(position, n) - 1
            words[end] = words[end] + "."
        records.append(
            TextRecord(
                id=f"{id_prefix}-{i:05d}",
                text=" ".join(words),
                label=label,
                source="synthetic",
                generator="vocab-b",
            )
        )
    return records
