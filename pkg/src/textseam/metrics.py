"""Boundary-error and sentence-level evaluation metrics.

Sentence handling follows the comparison protocol: a sentence that the
actual boundary cuts through is excluded, the rest are classified as
entirely human or entirely machine, and a prediction is correct only
when it assigns the sentence the same whole-sentence class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, TYPE_CHECKING

from .errors import ValidationError
from .featurizer import split_words

if TYPE_CHECKING:
    from .dataio import TextRecord

END_OF_SENTENCE = "end_of_sentence"
MID_SENTENCE = "mid_sentence"

_TERMINATORS = {".", "!", "?"}
# characters ignored when looking at a word's final character
_CLOSERS = set("\"'`)]}»”’›")


class SentenceSpan(NamedTuple):
    start_word: int
    end_word: int  # exclusive


def split_sentences(words: Sequence[str]) -> list[SentenceSpan]:
    """Partition words into sentences ending on '.', '!' or '?'.

    Trailing quotes/brackets are skipped; the final span always closes at
    the word count. Abbreviations are split naively by design.
    """
    if not words:
        raise ValidationError("empty word sequence")
    spans: list[SentenceSpan] = []
    start = 0
    for i, word in enumerate(words):
        stripped = word.rstrip("".join(_CLOSERS))
        if stripped and stripped[-1] in _TERMINATORS:
            spans.append(SentenceSpan(start, i + 1))
            start = i + 1
    if start < len(words):
        spans.append(SentenceSpan(start, len(words)))
    return spans


def mae(pairs: Sequence[tuple[int, int]]) -> float:
    """Mean absolute error between predicted and actual boundary indices."""
    if not pairs:
        raise ValidationError("no (pred, gold) pairs")
    return sum(abs(p - g) for p, g in pairs) / len(pairs)


def mare(triples: Sequence[tuple[int, int, int]]) -> float:
    """Mean over records of the absolute boundary error relative to text length."""
    if not triples:
        raise ValidationError("no (pred, gold, word_count) triples")
    for _, _, n in triples:
        if n < 1:
            raise ValidationError("word_count must be >= 1")
    return sum(abs(p - g) / n for p, g, n in triples) / len(triples)


def sentence_eval(
    spans: Sequence[SentenceSpan], gold_b: int, pred_b: int
) -> tuple[int, int]:
    """Count sentences included in and correctly classified by a prediction.

    Sentences cut by the actual boundary are excluded. A sentence cut by
    the predicted boundary matches neither whole-sentence class and
    counts as incorrect.
    """
    included = 0
    correct = 0
    for start, end in spans:
        if start < gold_b < end:
            continue
        included += 1
        if start < pred_b < end:
            continue
        gold_is_human = end <= gold_b
        pred_is_human = end <= pred_b
        if gold_is_human == pred_is_human:
            correct += 1
    return included, correct


def aggregate_sentence_metrics(counts: Sequence[tuple[int, int]]) -> tuple[float, float]:
    """Pooled and per-text-averaged sentence accuracy.

    ``counts`` holds per-record (included, correct) pairs; records with
    no included sentences are dropped from the average.
    """
    total_included = sum(inc for inc, _ in counts)
    if total_included == 0:
        raise ValidationError("every sentence was excluded; no sentence metrics")
    overall = sum(cor for _, cor in counts) / total_included
    ratios = [cor / inc for inc, cor in counts if inc > 0]
    average = sum(ratios) / len(ratios)
    return overall, average


def placement_split(spans: Sequence[SentenceSpan], gold_b: int) -> str:
    """Whether the actual boundary sits at a sentence edge or inside one."""
    if gold_b == spans[-1].end_word:
        return END_OF_SENTENCE
    if any(span.start_word == gold_b for span in spans):
        return END_OF_SENTENCE
    return MID_SENTENCE


@dataclass
class RecordEval:
    """Per-record evaluation detail."""

    id: str
    word_count: int
    gold: int
    pred: int
    abs_error: int
    included: int
    correct: int
    placement: str


@dataclass
class EvalResult:
    """Aggregate evaluation over a dataset."""

    mae: float
    mare: float
    overall_sentence_accuracy: float
    average_sentence_accuracy: float
    mid_sentence_accuracy: float | None
    end_of_sentence_accuracy: float | None
    records: list[RecordEval] = field(default_factory=list)


def _pooled_accuracy(rows: list[RecordEval]) -> float | None:
    included = sum(r.included for r in rows)
    if included == 0:
        return None
    return sum(r.correct for r in rows) / included


def evaluate_dataset(records: Sequence["TextRecord"], predictions: dict[str, int]) -> EvalResult:
    """Evaluate boundary predictions against gold labels, record by record."""
    if not records:
        raise ValidationError("empty dataset")
    rows: list[RecordEval] = []
    for record in records:
        if record.id not in predictions:
            raise ValidationError(f"no prediction for record {record.id!r}")
        pred = predictions[record.id]
        words = split_words(record.text)
        spans = split_sentences(words)
        included, correct = sentence_eval(spans, record.label, pred)
        rows.append(
            RecordEval(
                id=record.id,
                word_count=len(words),
                gold=record.label,
                pred=pred,
                abs_error=abs(pred - record.label),
                included=included,
                correct=correct,
                placement=placement_split(spans, record.label),
            )
        )

    overall, average = aggregate_sentence_metrics([(r.included, r.correct) for r in rows])
    return EvalResult(
        mae=mae([(r.pred, r.gold) for r in rows]),
        mare=mare([(r.pred, r.gold, r.word_count) for r in rows]),
        overall_sentence_accuracy=overall,
        average_sentence_accuracy=average,
        mid_sentence_accuracy=_pooled_accuracy([r for r in rows if r.placement == MID_SENTENCE]),
        end_of_sentence_accuracy=_pooled_accuracy(
            [r for r in rows if r.placement == END_OF_SENTENCE]
        ),
        records=rows,
    )
