"""Part-of-speech analysis around the boundary.

The built-in tagger is a deterministic rule cascade over a coarse
12-tag universal-style set; datasets may carry their own per-word tags,
which take precedence so any external tagger can be swapped in.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from statistics import median
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

TAGS = ("NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "ADP", "NUM", "CONJ", "PRT", "PUNCT", "X")
BOS_TAG = "BOS"
EOS_TAG = "EOS"

_DET = {
    "the", "a", "an", "this", "that", "these", "those", "some", "any", "each",
    "every", "no", "another", "such", "both", "either", "neither", "all",
}
_PRON = {
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them",
    "my", "your", "his", "its", "our", "their", "mine", "yours", "hers", "ours",
    "theirs", "myself", "yourself", "himself", "herself", "itself", "ourselves",
    "themselves", "who", "whom", "whose", "which", "what", "someone", "anyone",
    "everyone", "nothing", "something", "anything", "everything",
}
_ADP = {
    "of", "in", "on", "at", "by", "for", "with", "from", "about", "into", "over",
    "after", "under", "between", "through", "during", "against", "among", "within",
    "without", "before", "above", "below", "across", "behind", "beyond", "near",
    "toward", "towards", "upon", "off", "onto", "via", "per",
}
_CONJ = {
    "and", "or", "but", "nor", "so", "yet", "if", "because", "although", "though",
    "while", "whereas", "since", "unless", "until", "when", "whether", "than", "as",
}
_PRT = {"to", "not", "n't", "'s"}

_LEXICON: dict[str, str] = {}
for _words, _tag in ((_DET, "DET"), (_PRON, "PRON"), (_ADP, "ADP"), (_CONJ, "CONJ"), (_PRT, "PRT")):
    for _w in _words:
        _LEXICON[_w] = _tag

_VERB_SUFFIXES = ("ing", "ed", "ize", "ate")
_ADJ_SUFFIXES = ("ous", "ful", "ive", "able", "al")
_PUNCT_CHARS = set(string.punctuation) | set("…—–‘’“”«»")


def _tag_word(word: str) -> str:
    if all(c in _PUNCT_CHARS for c in word):
        return "PUNCT"
    core = word.strip("".join(_PUNCT_CHARS))
    if not core:
        return "PUNCT"
    if any(c.isdigit() for c in core) and not any(c.isalpha() for c in core):
        return "NUM"
    lower = core.lower()
    if lower in _LEXICON:
        return _LEXICON[lower]
    if lower.endswith("ly") and len(lower) >= 4:
        return "ADV"
    for suffix in _VERB_SUFFIXES:
        if lower.endswith(suffix) and len(lower) >= len(suffix) + 2:
            return "VERB"
    for suffix in _ADJ_SUFFIXES:
        if lower.endswith(suffix) and len(lower) >= len(suffix) + 2:
            return "ADJ"
    return "NOUN"


def pos_tag(words: Sequence[str]) -> list[str]:
    """Coarse deterministic tags, one per word."""
    if not words:
        raise ValidationError("empty word sequence")
    return [_tag_word(w) for w in words]


def boundary_pos_pair(words: Sequence[str], tags: Sequence[str], gold_b: int) -> tuple[str, str]:
    """Tags of the last human and first machine word around the boundary."""
    if len(tags) != len(words):
        raise ValidationError("tags are not aligned with words")
    if not 0 <= gold_b <= len(words):
        raise ValidationError(f"boundary {gold_b} out of range [0, {len(words)}]")
    pre = tags[gold_b - 1] if gold_b > 0 else BOS_TAG
    post = tags[gold_b] if gold_b < len(words) else EOS_TAG
    return pre, post


@dataclass
class PosPairRow:
    pre: str
    post: str
    count: int
    median_mae: float | None


def pos_pair_table(records: Iterable[tuple[str, str, float | None]]) -> list[PosPairRow]:
    """Group boundary tag pairs, with counts and the median absolute error.

    Records with no error value (e.g. no predictions yet) yield rows with
    an empty median. Even-sized groups take the mean of the middle two.
    """
    counts: dict[tuple[str, str], int] = {}
    errors: dict[tuple[str, str], list[float]] = {}
    for pre, post, err in records:
        key = (pre, post)
        counts[key] = counts.get(key, 0) + 1
        if err is not None:
            errors.setdefault(key, []).append(float(err))
    return [
        PosPairRow(
            pre=pre,
            post=post,
            count=counts[(pre, post)],
            median_mae=float(median(errors[(pre, post)])) if (pre, post) in errors else None,
        )
        for pre, post in sorted(counts)
    ]


def pos_distribution(
    words: Sequence[str], tags: Sequence[str], gold_b: int
) -> dict[str, tuple[float | None, float | None]]:
    """Per-tag share of words in the human and machine portions.

    An empty portion reports ``None`` for every tag; shares within a
    non-empty portion sum to 1.
    """
    if len(tags) != len(words):
        raise ValidationError("tags are not aligned with words")
    if not 0 <= gold_b <= len(words):
        raise ValidationError(f"boundary {gold_b} out of range [0, {len(words)}]")

    def shares(portion: Sequence[str]) -> dict[str, float] | None:
        if not portion:
            return None
        out = {t: 0 for t in TAGS}
        for tag in portion:
            out[tag] = out.get(tag, 0) + 1
        return {t: c / len(portion) for t, c in out.items()}

    human = shares(tags[:gold_b])
    machine = shares(tags[gold_b:])
    result: dict[str, tuple[float | None, float | None]] = {}
    all_tags = set(TAGS) | set(tags)
    for tag in sorted(all_tags):
        result[tag] = (
            None if human is None else human.get(tag, 0.0),
            None if machine is None else machine.get(tag, 0.0),
        )
    return result


def boundary_location_histogram(
    records: Sequence[tuple[int, int]], bins: int
) -> np.ndarray:
    """Counts per equal-width bin of the relative boundary position in [0, 1]."""
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    counts = np.zeros(bins, dtype=np.int64)
    for gold_b, word_count in records:
        if word_count < 1:
            raise ValidationError("word_count must be >= 1")
        if not 0 <= gold_b <= word_count:
            raise ValidationError(f"boundary {gold_b} out of range [0, {word_count}]")
        index = min(bins - 1, bins * gold_b // word_count)
        counts[index] += 1
    return counts
