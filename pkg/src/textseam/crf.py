"""Exact inference and learning for a two-label linear-chain CRF.

The label alphabet is fixed: 0 = human-written, 1 = machine-generated.
A path score is

    start[y_1] + sum_t emissions[t][y_t]
    + sum_t transition[y_t][y_{t+1}] + end[y_T]

and all inference runs in log space so that sequences of thousands of
tokens with |scores| up to ~700 neither overflow nor underflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

HUMAN = 0
MACHINE = 1
N_LABELS = 2


@dataclass
class CrfParams:
    """Start/transition/end scores of the chain.

    ``transition[i][j]`` scores moving from label ``i`` to label ``j``.
    """

    start: np.ndarray = field(default_factory=lambda: np.zeros(N_LABELS))
    transition: np.ndarray = field(default_factory=lambda: np.zeros((N_LABELS, N_LABELS)))
    end: np.ndarray = field(default_factory=lambda: np.zeros(N_LABELS))

    def __post_init__(self) -> None:
        self.start = np.asarray(self.start, dtype=np.float64)
        self.transition = np.asarray(self.transition, dtype=np.float64)
        self.end = np.asarray(self.end, dtype=np.float64)

    def validate(self) -> None:
        if self.start.shape != (N_LABELS,):
            raise ValidationError(f"start scores must have shape (2,), got {self.start.shape}")
        if self.transition.shape != (N_LABELS, N_LABELS):
            raise ValidationError(
                f"transition scores must have shape (2, 2), got {self.transition.shape}"
            )
        if self.end.shape != (N_LABELS,):
            raise ValidationError(f"end scores must have shape (2,), got {self.end.shape}")
        for name, arr in (("start", self.start), ("transition", self.transition), ("end", self.end)):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"non-finite value in {name} scores")

    def copy(self) -> "CrfParams":
        return CrfParams(self.start.copy(), self.transition.copy(), self.end.copy())


@dataclass
class EmissionMatrix:
    """Per-token scores over the two labels, with token-to-word alignment.

    ``word_index`` maps each token to its word: it starts at 0 and is
    non-decreasing with steps of 0 or 1, so tokens cover a word prefix.
    """

    scores: np.ndarray
    word_index: np.ndarray

    def __post_init__(self) -> None:
        self.scores = np.asarray(self.scores, dtype=np.float64)
        self.word_index = np.asarray(self.word_index, dtype=np.int64)

    @property
    def token_count(self) -> int:
        return self.scores.shape[0]

    def validate(self) -> None:
        if self.scores.ndim != 2 or self.scores.shape[1] != N_LABELS:
            raise ValidationError(f"emission scores must have shape (T, 2), got {self.scores.shape}")
        if self.scores.shape[0] < 1:
            raise ValidationError("emission matrix is empty (T must be >= 1)")
        if not np.all(np.isfinite(self.scores)):
            raise ValidationError("non-finite emission score")
        if self.word_index.shape != (self.scores.shape[0],):
            raise ValidationError("word_index length must equal token count")
        if self.word_index[0] != 0:
            raise ValidationError("word_index must start at 0")
        steps = np.diff(self.word_index)
        if steps.size and (steps.min() < 0 or steps.max() > 1):
            raise ValidationError("word_index must be non-decreasing with steps of 0 or 1")


@dataclass
class PosteriorMarginals:
    """Per-token posterior label probabilities; each row sums to 1."""

    probs: np.ndarray


def _validate_inputs(emissions: EmissionMatrix, params: CrfParams) -> None:
    emissions.validate()
    params.validate()


def _forward(scores: np.ndarray, params: CrfParams) -> np.ndarray:
    """log alpha[t][y]: log-sum over prefixes ending at t with label y."""
    T = scores.shape[0]
    trans = params.transition
    log_alpha = np.empty((T, N_LABELS))
    log_alpha[0] = params.start + scores[0]
    for t in range(1, T):
        prev = log_alpha[t - 1]
        log_alpha[t] = scores[t] + np.logaddexp(prev[0] + trans[0], prev[1] + trans[1])
    return log_alpha


def _backward(scores: np.ndarray, params: CrfParams) -> np.ndarray:
    """log beta[t][y]: log-sum over suffixes following position t with label y."""
    T = scores.shape[0]
    trans = params.transition
    log_beta = np.empty((T, N_LABELS))
    log_beta[T - 1] = params.end
    for t in range(T - 2, -1, -1):
        nxt = scores[t + 1] + log_beta[t + 1]
        log_beta[t] = np.logaddexp(trans[:, 0] + nxt[0], trans[:, 1] + nxt[1])
    return log_beta


def log_partition(emissions: EmissionMatrix, params: CrfParams) -> float:
    """Log of the sum of exponentiated scores over all 2^T label paths."""
    _validate_inputs(emissions, params)
    log_alpha = _forward(emissions.scores, params)
    last = log_alpha[-1] + params.end
    return float(np.logaddexp(last[0], last[1]))


def viterbi(emissions: EmissionMatrix, params: CrfParams) -> tuple[np.ndarray, float]:
    """Maximum-score label path and its score.

    Ties are broken in favour of label 0 at the earliest differing
    position, so among equally scored paths the lexicographically
    smallest is returned. The recursion therefore runs backward and the
    path is selected front to back.
    """
    _validate_inputs(emissions, params)
    scores = emissions.scores
    trans = params.transition
    T = scores.shape[0]

    # best[t][y]: max score of a suffix starting at t with label y
    best = np.empty((T, N_LABELS))
    best[T - 1] = scores[T - 1] + params.end
    for t in range(T - 2, -1, -1):
        best[t] = scores[t] + np.maximum(trans[:, 0] + best[t + 1, 0], trans[:, 1] + best[t + 1, 1])

    totals = params.start + best[0]
    path = np.empty(T, dtype=np.int64)
    path[0] = 0 if totals[0] >= totals[1] else 1
    for t in range(1, T):
        cont = trans[path[t - 1]] + best[t]
        path[t] = 0 if cont[0] >= cont[1] else 1
    return path, float(totals.max())


def marginals(emissions: EmissionMatrix, params: CrfParams) -> PosteriorMarginals:
    """Posterior P(y_t = y) for every position, via forward-backward."""
    _validate_inputs(emissions, params)
    probs = _marginals_from_messages(*_messages(emissions, params))
    return PosteriorMarginals(probs=probs)


def _messages(emissions: EmissionMatrix, params: CrfParams):
    log_alpha = _forward(emissions.scores, params)
    log_beta = _backward(emissions.scores, params)
    last = log_alpha[-1] + params.end
    log_z = float(np.logaddexp(last[0], last[1]))
    return log_alpha, log_beta, log_z


def _marginals_from_messages(log_alpha: np.ndarray, log_beta: np.ndarray, log_z: float) -> np.ndarray:
    probs = np.exp(log_alpha + log_beta - log_z)
    probs /= probs.sum(axis=1, keepdims=True)
    return probs


def path_score(emissions: EmissionMatrix, params: CrfParams, labels: np.ndarray) -> float:
    """Score of one explicit label path."""
    scores = emissions.scores
    total = params.start[labels[0]] + scores[np.arange(len(labels)), labels].sum()
    if len(labels) > 1:
        total += params.transition[labels[:-1], labels[1:]].sum()
    total += params.end[labels[-1]]
    return float(total)


def nll_grad(
    emissions: EmissionMatrix, params: CrfParams, gold: np.ndarray
) -> tuple[float, np.ndarray, CrfParams]:
    """Negative log-likelihood of the gold path and its gradients.

    Returns ``(nll, d_emissions, d_params)`` where every gradient entry
    is an expected-minus-observed count under the posterior.
    """
    _validate_inputs(emissions, params)
    gold = np.asarray(gold, dtype=np.int64)
    T = emissions.token_count
    if gold.shape != (T,):
        raise ValidationError(f"gold label length {gold.shape} does not match token count {T}")
    if gold.size and (gold.min() < 0 or gold.max() > 1):
        raise ValidationError("gold labels must be 0 or 1")

    scores = emissions.scores
    log_alpha, log_beta, log_z = _messages(emissions, params)
    unary = _marginals_from_messages(log_alpha, log_beta, log_z)

    # nll >= 0 mathematically; clamp guards rounding on saturated models
    nll = max(0.0, log_z - path_score(emissions, params, gold))

    d_emissions = unary.copy()
    d_emissions[np.arange(T), gold] -= 1.0

    d_start = unary[0].copy()
    d_start[gold[0]] -= 1.0
    d_end = unary[-1].copy()
    d_end[gold[-1]] -= 1.0

    d_trans = np.zeros((N_LABELS, N_LABELS))
    if T > 1:
        log_pair = (
            log_alpha[:-1, :, None]
            + params.transition[None, :, :]
            + (scores[1:] + log_beta[1:])[:, None, :]
            - log_z
        )
        d_trans = np.exp(log_pair).sum(axis=0)
        np.add.at(d_trans, (gold[:-1], gold[1:]), -1.0)

    return nll, d_emissions, CrfParams(start=d_start, transition=d_trans, end=d_end)
