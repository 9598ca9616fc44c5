"""Word splitting and the built-in hashed-feature linear emitter.

This emitter is the self-contained, trainable stand-in for an external
token classifier: it produces one token per word, scoring each word by
summing hashed-feature weights. Transformer logits can be supplied
instead through the external-emissions path in :mod:`textseam.dataio`.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from hashlib import blake2b

import numpy as np

from .crf import EmissionMatrix, N_LABELS
from .errors import ValidationError

DEFAULT_DIM = 2**18
BOS = "<bos>"
EOS = "<eos>"

_PUNCT = set(string.punctuation)


def split_words(text: str) -> list[str]:
    """Split on Unicode whitespace; the word is the unit of labeling."""
    words = text.split()
    if not words:
        raise ValidationError("text is empty or whitespace-only")
    return words


def _shape(word: str) -> str:
    upper = "U" if any(c.isupper() for c in word) else "l"
    digit = "d" if any(c.isdigit() for c in word) else "-"
    punct = "p" if any(c in _PUNCT for c in word) else "-"
    return upper + digit + punct


def _templates(words: list[str], position: int) -> list[str]:
    n = len(words)
    word = words[position]
    lower = word.lower()
    prev_word = words[position - 1].lower() if position > 0 else BOS
    next_word = words[position + 1].lower() if position + 1 < n else EOS
    feats = [
        "w=" + word,
        "wl=" + lower,
        "prev=" + prev_word,
        "next=" + next_word,
        "bucket=" + str(10 * position // n),
        "shape=" + _shape(word),
    ]
    for size in (2, 3, 4):
        for i in range(len(word) - size + 1):
            feats.append(f"ng{size}=" + word[i : i + size])
    return feats


def _hash_index(feature: str, seed: int, dim: int) -> int:
    digest = blake2b(
        feature.encode("utf-8"), digest_size=8, key=(seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
    ).digest()
    return int.from_bytes(digest, "little") & (dim - 1)


def featurize(words: list[str], position: int, seed: int, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Hashed feature indices for one word position, as a sorted unique array."""
    if not 0 <= position < len(words):
        raise ValidationError(f"position {position} out of range for {len(words)} words")
    _check_dim(dim)
    idx = {_hash_index(f, seed, dim) for f in _templates(words, position)}
    return np.fromiter(sorted(idx), dtype=np.int64, count=len(idx))


def featurize_words(words: list[str], seed: int, dim: int = DEFAULT_DIM) -> list[np.ndarray]:
    """Feature indices for every position of a word sequence."""
    return [featurize(words, p, seed, dim) for p in range(len(words))]


def _check_dim(dim: int) -> None:
    if dim < 2 or dim & (dim - 1):
        raise ValidationError(f"hashing dimension must be a power of two >= 2, got {dim}")


@dataclass
class EmitterWeights:
    """Linear emitter parameters over the hashed feature space."""

    weights: np.ndarray
    hash_seed: int
    dim: int = DEFAULT_DIM

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)

    @classmethod
    def zeros(cls, hash_seed: int, dim: int = DEFAULT_DIM) -> "EmitterWeights":
        _check_dim(dim)
        return cls(weights=np.zeros((dim, N_LABELS)), hash_seed=hash_seed, dim=dim)

    def validate(self) -> None:
        _check_dim(self.dim)
        if self.weights.shape != (self.dim, N_LABELS):
            raise ValidationError(
                f"weights must have shape ({self.dim}, 2), got {self.weights.shape}"
            )
        if not np.all(np.isfinite(self.weights)):
            raise ValidationError("non-finite emitter weight")


def scores_for_features(feature_sets: list[np.ndarray], weights: EmitterWeights) -> EmissionMatrix:
    """Emission matrix for pre-computed feature sets (one token per word)."""
    T = len(feature_sets)
    if T == 0:
        raise ValidationError("no feature sets given")
    scores = np.zeros((T, N_LABELS))
    w = weights.weights
    for t, idx in enumerate(feature_sets):
        if idx.size:
            scores[t] = w[idx].sum(axis=0)
    return EmissionMatrix(scores=scores, word_index=np.arange(T, dtype=np.int64))


def emission_scores(words: list[str], weights: EmitterWeights) -> EmissionMatrix:
    """Score every word with the linear emitter; one token per word."""
    weights.validate()
    feats = featurize_words(words, weights.hash_seed, weights.dim)
    return scores_for_features(feats, weights)


def accumulate_weight_grad(
    d_emissions: np.ndarray, feature_sets: list[np.ndarray], dim: int
) -> np.ndarray:
    """Chain rule through the linear emitter: scatter token gradients onto weights."""
    d_emissions = np.asarray(d_emissions, dtype=np.float64)
    if d_emissions.shape != (len(feature_sets), N_LABELS):
        raise ValidationError(
            f"gradient shape {d_emissions.shape} does not match {len(feature_sets)} feature sets"
        )
    _check_dim(dim)
    grad = np.zeros((dim, N_LABELS))
    for t, idx in enumerate(feature_sets):
        if idx.size:
            grad[idx] += d_emissions[t]
    return grad
