"""Boundary/label conversions and the two boundary-decoding approaches.

A boundary index ``b`` is the word index of the first machine-generated
word: ``b == word_count`` means fully human, ``b == 0`` fully machine.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def labels_from_boundary(boundary: int, word_count: int) -> np.ndarray:
    """0/1 word labels for a human prefix followed by a machine suffix."""
    if not 0 <= boundary <= word_count:
        raise ValidationError(f"boundary {boundary} out of range [0, {word_count}]")
    labels = np.zeros(word_count, dtype=np.int64)
    labels[boundary:] = 1
    return labels


def word_labels_from_tokens(
    token_labels: np.ndarray, word_index: np.ndarray, word_count: int
) -> np.ndarray:
    """Aggregate token labels to word labels.

    A word is machine-generated if any of its tokens is; words past the
    last covered word (truncation) inherit the last covered word's label.
    """
    token_labels = np.asarray(token_labels, dtype=np.int64)
    word_index = np.asarray(word_index, dtype=np.int64)
    if token_labels.size == 0:
        raise ValidationError("empty token label sequence")
    if token_labels.shape != word_index.shape:
        raise ValidationError("token labels and word_index lengths differ")
    if word_index[0] != 0:
        raise ValidationError("word_index must start at 0")
    steps = np.diff(word_index)
    if steps.size and (steps.min() < 0 or steps.max() > 1):
        raise ValidationError("word_index must be non-decreasing with steps of 0 or 1")
    last = int(word_index[-1])
    if last >= word_count:
        raise ValidationError(f"word_index {last} exceeds word count {word_count}")

    labels = np.zeros(word_count, dtype=np.int64)
    np.maximum.at(labels, word_index, token_labels)
    labels[last + 1 :] = labels[last]
    return labels


def _degenerate(labels: np.ndarray) -> int:
    # no label change anywhere: all-human maps to word_count, all-machine to 0
    return len(labels) if labels[0] == 0 else 0


def decode_boundary_a1(labels: np.ndarray) -> int:
    """Approach 1: index of the first label change, in either direction."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ValidationError("empty label sequence")
    for i in range(1, len(labels)):
        if labels[i] != labels[i - 1]:
            return i
    return _degenerate(labels)


def decode_boundary_a2(labels: np.ndarray) -> int:
    """Approach 2: first label change confirmed by a repeated label.

    A change at ``i`` counts only if position ``i + 1`` carries the same
    label (or ``i`` is the final position). Without any confirmed change
    this falls back to approach 1.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ValidationError("empty label sequence")
    n = len(labels)
    first_change = None
    for i in range(1, n):
        if labels[i] != labels[i - 1]:
            if first_change is None:
                first_change = i
            if i == n - 1 or labels[i + 1] == labels[i]:
                return i
    if first_change is not None:
        return first_change
    return _degenerate(labels)
