import random
from pathlib import Path

import numpy as np
import pytest

from textseam import (
    ValidationError,
    aggregate_sentence_metrics,
    evaluate_dataset,
    load_dataset,
    load_predictions,
    mae,
    mare,
    placement_split,
    sentence_eval,
    split_sentences,
)
from textseam.metrics import END_OF_SENTENCE, MID_SENTENCE, SentenceSpan

DATA = Path(__file__).parent / "data"


def test_mae_examples():
    assert mae([(3, 3)]) == 0.0
    assert mae([(3, 5), (10, 7)]) == 2.5


def test_mae_matches_independent_computation():
    rng = np.random.default_rng(2)
    pairs = [(int(p), int(g)) for p, g in rng.integers(0, 300, size=(1000, 2))]
    expected = float(np.mean(np.abs(np.array([p for p, _ in pairs]) - np.array([g for _, g in pairs]))))
    assert abs(mae(pairs) - expected) < 1e-12


def test_mae_rejects_empty():
    with pytest.raises(ValidationError):
        mae([])


def test_mare_examples():
    assert mare([(3, 5, 100)]) == pytest.approx(0.02, abs=1e-15)
    assert mare([(2, 0, 10), (3, 0, 100)]) == pytest.approx(0.115, abs=1e-15)
    assert mare([(4, 4, 9), (0, 0, 5)]) == 0.0


def test_mare_rejects_bad_word_count():
    with pytest.raises(ValidationError):
        mare([(1, 2, 0)])
    with pytest.raises(ValidationError):
        mare([])


def test_split_sentences_examples():
    assert split_sentences(["Hi.", "Go!"]) == [SentenceSpan(0, 1), SentenceSpan(1, 2)]
    assert split_sentences(["no", "terminators", "here"]) == [SentenceSpan(0, 3)]
    # naive on abbreviations, by design
    assert split_sentences(["Dr.", "Smith", "left."]) == [SentenceSpan(0, 1), SentenceSpan(1, 3)]


def test_split_sentences_skips_trailing_quotes_and_brackets():
    assert split_sentences(["He", 'said:', '"stop!"', "then", "left."]) == [
        SentenceSpan(0, 3),
        SentenceSpan(3, 5),
    ]
    assert split_sentences(["(done?)", "yes"]) == [SentenceSpan(0, 1), SentenceSpan(1, 2)]


def test_split_sentences_rejects_empty():
    with pytest.raises(ValidationError):
        split_sentences([])


def test_split_sentences_partitions_random_word_lists():
    rng = random.Random(5)
    pieces = ["word", "mid.dle", "end.", "stop!", "eh?", "quote.\"", "plain", "x"]
    for _ in range(200):
        words = [rng.choice(pieces) for _ in range(rng.randint(1, 40))]
        spans = split_sentences(words)
        assert spans[0].start_word == 0
        assert spans[-1].end_word == len(words)
        for left, right in zip(spans, spans[1:]):
            assert left.end_word == right.start_word
        assert all(s.start_word < s.end_word for s in spans)


def test_sentence_eval_prediction_straddles_second_sentence():
    spans = [SentenceSpan(0, 5), SentenceSpan(5, 10)]
    assert sentence_eval(spans, gold_b=5, pred_b=7) == (2, 1)


def test_sentence_eval_perfect_prediction():
    spans = [SentenceSpan(0, 5), SentenceSpan(5, 10)]
    for gold in (0, 5, 10):
        included, correct = sentence_eval(spans, gold, gold)
        assert included == 2 and correct == 2
    included, correct = sentence_eval(spans, 3, 3)
    assert correct == included == 1


def test_sentence_eval_gold_straddle_excluded():
    spans = [SentenceSpan(0, 4), SentenceSpan(4, 8), SentenceSpan(8, 12)]
    assert sentence_eval(spans, gold_b=6, pred_b=0) == (2, 1)


def test_aggregate_examples():
    assert aggregate_sentence_metrics([(2, 1), (2, 2)]) == (0.75, 0.75)
    overall, average = aggregate_sentence_metrics([(4, 2), (1, 1)])
    assert overall == pytest.approx(0.6, abs=1e-15)
    assert average == pytest.approx(0.75, abs=1e-15)
    assert aggregate_sentence_metrics([(3, 3), (2, 2)]) == (1.0, 1.0)


def test_aggregate_drops_empty_records_from_average():
    overall, average = aggregate_sentence_metrics([(2, 1), (0, 0)])
    assert overall == 0.5
    assert average == 0.5


def test_aggregate_rejects_all_excluded():
    with pytest.raises(ValidationError):
        aggregate_sentence_metrics([(0, 0), (0, 0)])


def test_aggregate_overall_is_included_weighted_mean():
    rng = random.Random(11)
    for _ in range(100):
        counts = []
        for _ in range(rng.randint(1, 20)):
            included = rng.randint(0, 6)
            counts.append((included, rng.randint(0, included)))
        if sum(inc for inc, _ in counts) == 0:
            continue
        overall, _ = aggregate_sentence_metrics(counts)
        weighted = sum(inc * (cor / inc) for inc, cor in counts if inc) / sum(
            inc for inc, _ in counts
        )
        assert overall == pytest.approx(weighted, abs=1e-12)


def test_placement_examples():
    spans = [SentenceSpan(0, 5), SentenceSpan(5, 9)]
    assert placement_split(spans, 5) == END_OF_SENTENCE
    assert placement_split(spans, 3) == MID_SENTENCE
    assert placement_split(spans, 9) == END_OF_SENTENCE
    assert placement_split(spans, 0) == END_OF_SENTENCE


def test_fixture_reproduces_hand_computed_values():
    records = load_dataset(DATA / "metrics_fixture.jsonl")
    predictions = load_predictions(DATA / "metrics_fixture_predictions.jsonl")
    result = evaluate_dataset(records, predictions)

    # hand computation: abs errors 0,1,4,0,2,0,2,0,0,2 over word counts
    # 6,6,6,5,4,6,8,4,6,4; sentence counts (incl, corr):
    # (2,2) (2,1) (1,0) (1,1) (1,0) (3,3) (4,3) (0,0) (1,1) (2,1)
    assert abs(result.mae - 1.1) <= 1e-12
    assert abs(result.mare - 25 / 120) <= 1e-12
    assert abs(result.overall_sentence_accuracy - 12 / 17) <= 1e-12
    assert abs(result.average_sentence_accuracy - 23 / 36) <= 1e-12
    assert abs(result.end_of_sentence_accuracy - 11 / 15) <= 1e-12
    assert abs(result.mid_sentence_accuracy - 1 / 2) <= 1e-12

    by_id = {r.id: r for r in result.records}
    assert by_id["r08"].included == 0  # whole record is gold-straddled
    assert by_id["r02"].included == 2 and by_id["r02"].correct == 1  # pred straddles
    assert result.overall_sentence_accuracy != result.average_sentence_accuracy
    assert [r.placement for r in result.records] == [
        END_OF_SENTENCE, END_OF_SENTENCE, MID_SENTENCE, END_OF_SENTENCE, END_OF_SENTENCE,
        END_OF_SENTENCE, END_OF_SENTENCE, MID_SENTENCE, MID_SENTENCE, END_OF_SENTENCE,
    ]


def test_evaluate_dataset_is_order_independent():
    records = load_dataset(DATA / "metrics_fixture.jsonl")
    predictions = load_predictions(DATA / "metrics_fixture_predictions.jsonl")
    base = evaluate_dataset(records, predictions)
    shuffled = list(records)
    random.Random(3).shuffle(shuffled)
    other = evaluate_dataset(shuffled, predictions)
    for field in (
        "mae", "mare", "overall_sentence_accuracy", "average_sentence_accuracy",
        "mid_sentence_accuracy", "end_of_sentence_accuracy",
    ):
        assert getattr(base, field) == getattr(other, field)


def test_evaluate_dataset_perfect_predictions():
    records = load_dataset(DATA / "metrics_fixture.jsonl")
    predictions = {r.id: r.label for r in records}
    result = evaluate_dataset(records, predictions)
    assert result.mae == 0.0
    assert result.mare == 0.0
    assert result.overall_sentence_accuracy == 1.0
    assert result.average_sentence_accuracy == 1.0


def test_evaluate_dataset_requires_predictions():
    records = load_dataset(DATA / "metrics_fixture.jsonl")
    with pytest.raises(ValidationError):
        evaluate_dataset(records, {})


def test_permutation_invariance_of_error_metrics():
    rng = np.random.default_rng(17)
    pairs = [(int(p), int(g)) for p, g in rng.integers(0, 50, size=(200, 2))]
    triples = [(p, g, int(rng.integers(max(p, g, 1), 200))) for p, g in pairs]
    shuffled_pairs = list(pairs)
    random.Random(1).shuffle(shuffled_pairs)
    shuffled_triples = list(triples)
    random.Random(1).shuffle(shuffled_triples)
    assert mae(pairs) == pytest.approx(mae(shuffled_pairs), abs=1e-12)
    assert mare(triples) == pytest.approx(mare(shuffled_triples), abs=1e-12)


def test_sentence_counts_bounded_by_span_count():
    rng = random.Random(23)
    for _ in range(200):
        n = rng.randint(1, 50)
        cuts = sorted(rng.sample(range(1, n), rng.randint(0, min(5, n - 1)))) + [n]
        spans = [SentenceSpan(a, b) for a, b in zip([0] + cuts[:-1], cuts)]
        gold = rng.randint(0, n)
        pred = rng.randint(0, n)
        included, correct = sentence_eval(spans, gold, pred)
        assert 0 <= correct <= included <= len(spans)
