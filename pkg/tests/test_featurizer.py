import numpy as np
import pytest

from textseam import (
    CrfParams,
    EmitterWeights,
    ValidationError,
    accumulate_weight_grad,
    emission_scores,
    featurize,
    nll_grad,
    split_words,
)
from textseam.crf import path_score, log_partition
from textseam.featurizer import _hash_index, featurize_words

DIM = 2**12
SEED = 41


def test_split_words_examples():
    assert split_words("a b  c") == ["a", "b", "c"]
    assert split_words("one") == ["one"]
    assert split_words("x\ty\nz") == ["x", "y", "z"]
    assert split_words("  padded   words ") == ["padded", "words"]


def test_split_words_rejects_empty():
    with pytest.raises(ValidationError):
        split_words("")
    with pytest.raises(ValidationError):
        split_words(" \t\n ")


def test_featurize_deterministic():
    words = ["The", "quick", "fox"]
    first = featurize(words, 1, SEED, DIM)
    second = featurize(words, 1, SEED, DIM)
    assert first.tolist() == second.tolist()


def test_featurize_sentinels_at_edges():
    words = ["alpha", "beta", "gamma"]
    assert _hash_index("prev=<bos>", SEED, DIM) in featurize(words, 0, SEED, DIM)
    assert _hash_index("next=<eos>", SEED, DIM) in featurize(words, 2, SEED, DIM)
    middle = featurize(words, 1, SEED, DIM)
    assert _hash_index("prev=<bos>", SEED, DIM) not in middle
    assert _hash_index("next=<eos>", SEED, DIM) not in middle


def test_featurize_seed_changes_indices():
    words = ["boundary", "words"]
    a = featurize(words, 0, SEED, DIM)
    b = featurize(words, 0, SEED + 1, DIM)
    assert a.tolist() != b.tolist()


def test_featurize_indices_bounded():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 12))
        words = ["".join(rng.choice(list("abcXYZ09.,"), size=rng.integers(1, 9))) for _ in range(n)]
        p = int(rng.integers(0, n))
        idx = featurize(words, p, int(rng.integers(0, 2**63)), DIM)
        assert idx.min() >= 0 and idx.max() < DIM
        assert len(set(idx.tolist())) == len(idx)


def test_featurize_position_out_of_range():
    with pytest.raises(ValidationError):
        featurize(["a"], 1, SEED, DIM)
    with pytest.raises(ValidationError):
        featurize(["a"], -1, SEED, DIM)


def test_emission_scores_zero_weights():
    weights = EmitterWeights.zeros(SEED, DIM)
    em = emission_scores(["a", "b", "c"], weights)
    assert em.scores.tolist() == [[0, 0], [0, 0], [0, 0]]
    assert em.word_index.tolist() == [0, 1, 2]


def test_emission_scores_single_active_feature():
    weights = EmitterWeights.zeros(SEED, DIM)
    active = featurize(["word"], 0, SEED, DIM)
    weights.weights[active[0]] = [2.0, -1.0]
    em = emission_scores(["word"], weights)
    assert em.scores.tolist() == [[2.0, -1.0]]


def test_emission_scores_linear_in_weights():
    rng = np.random.default_rng(5)
    words = ["Some", "words", "with", "42", "symbols!"]
    w1 = EmitterWeights(rng.normal(size=(DIM, 2)), SEED, DIM)
    w2 = EmitterWeights(rng.normal(size=(DIM, 2)), SEED, DIM)
    combined = EmitterWeights(w1.weights + w2.weights, SEED, DIM)
    total = emission_scores(words, combined).scores
    assert np.allclose(
        total, emission_scores(words, w1).scores + emission_scores(words, w2).scores, atol=1e-12
    )
    doubled = EmitterWeights(2.0 * w1.weights, SEED, DIM)
    assert np.allclose(
        emission_scores(words, doubled).scores, 2.0 * emission_scores(words, w1).scores, atol=1e-12
    )


def test_end_to_end_determinism():
    rng = np.random.default_rng(9)
    weights = EmitterWeights(rng.normal(size=(DIM, 2)), SEED, DIM)
    text = "Machine text boundaries are words."
    first = emission_scores(split_words(text), weights)
    second = emission_scores(split_words(text), weights)
    assert np.array_equal(first.scores, second.scores)


def test_accumulate_weight_grad_zero():
    feats = featurize_words(["a", "b"], SEED, DIM)
    grad = accumulate_weight_grad(np.zeros((2, 2)), feats, DIM)
    assert not grad.any()


def test_accumulate_weight_grad_single_feature():
    idx = np.array([17], dtype=np.int64)
    grad = accumulate_weight_grad(np.array([[0.3, -0.3]]), [idx], DIM)
    assert grad[17].tolist() == [0.3, -0.3]
    assert np.count_nonzero(grad) == 2


def test_accumulate_weight_grad_length_mismatch():
    with pytest.raises(ValidationError):
        accumulate_weight_grad(np.zeros((2, 2)), [np.array([1])], DIM)


def test_full_chain_matches_finite_differences():
    # featurize -> emissions -> CRF nll -> weight gradient, on a 5-word text
    rng = np.random.default_rng(11)
    words = split_words("alpha beta gamma delta epsilon")
    feats = featurize_words(words, SEED, DIM)
    weights = EmitterWeights(rng.normal(0, 0.5, size=(DIM, 2)), SEED, DIM)
    params = CrfParams(
        start=rng.normal(size=2), transition=rng.normal(size=(2, 2)), end=rng.normal(size=2)
    )
    gold = np.array([0, 0, 1, 1, 1])

    em = emission_scores(words, weights)
    _, d_emissions, _ = nll_grad(em, params, gold)
    analytic = accumulate_weight_grad(d_emissions, feats, DIM)

    def loss(w):
        e = emission_scores(words, EmitterWeights(w, SEED, DIM))
        return log_partition(e, params) - path_score(e, params, gold)

    h = 1e-5
    touched = sorted({int(i) for f in feats for i in f})
    for i in touched:
        for label in (0, 1):
            w = weights.weights.copy()
            w[i, label] += h
            plus = loss(w)
            w[i, label] -= 2 * h
            minus = loss(w)
            numeric = (plus - minus) / (2 * h)
            denom = max(abs(analytic[i, label]), abs(numeric), 1e-4)
            assert abs(analytic[i, label] - numeric) / denom < 1e-4
    untouched = np.ones(DIM, dtype=bool)
    untouched[touched] = False
    assert not analytic[untouched].any()
