"""Joint training of the linear emitter and CRF, plus prediction.

Training minimizes the CRF negative log-likelihood of the gold word
labels with per-record Adam steps; the record order is reshuffled every
epoch from the config seed, so a (dataset, config) pair always produces
bit-identical parameters.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence, TYPE_CHECKING

import numpy as np

from . import boundary, crf, featurizer
from .errors import ValidationError

if TYPE_CHECKING:
    from .dataio import EmissionRecord, TextRecord

log = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 2e-5
    weight_decay: float = 1e-2
    dropout_rate: float = 75e-4
    epochs: int = 30
    optimizer: str = "adam"
    seed: int = 0
    max_tokens: int = 512  # 0 = unlimited
    hash_dim: int = featurizer.DEFAULT_DIM

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be > 0")
        if not 0 <= self.dropout_rate < 1:
            raise ValidationError("dropout_rate must be in [0, 1)")
        if self.epochs < 1:
            raise ValidationError("epochs must be >= 1")
        if self.optimizer != "adam":
            raise ValidationError(f"unsupported optimizer {self.optimizer!r}")
        if self.max_tokens < 0:
            raise ValidationError("max_tokens must be >= 0 (0 = unlimited)")
        featurizer._check_dim(self.hash_dim)


@dataclass
class Model:
    """Trained emitter + CRF with its config snapshot."""

    emitter_weights: featurizer.EmitterWeights
    crf_params: crf.CrfParams
    config: TrainConfig
    version: int = MODEL_FORMAT_VERSION
    epoch_nll: list[float] = field(default_factory=list)  # not serialized


@dataclass
class AdamState:
    """First/second moment accumulators and the shared step counter."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0

    @classmethod
    def for_params(cls, params: dict[str, np.ndarray]) -> "AdamState":
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
        )


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    weight_decay: float = 0.0,
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One Adam update with bias correction, then decoupled weight decay.

    Arrays are updated in place; the (params, state) pair is returned for
    call-site clarity.
    """
    if set(params) != set(grads):
        raise ValidationError("parameter and gradient keys differ")
    state.step += 1
    bc1 = 1.0 - ADAM_BETA1**state.step
    bc2 = 1.0 - ADAM_BETA2**state.step
    for key, p in params.items():
        g = grads[key]
        if g.shape != p.shape:
            raise ValidationError(f"gradient shape mismatch for {key!r}")
        m = state.m[key]
        v = state.v[key]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * (g * g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)
        if weight_decay:
            p *= 1.0 - lr * weight_decay
    return params, state


def apply_feature_dropout(
    features: np.ndarray, rate: float, rng: np.random.Generator
) -> np.ndarray:
    """Drop each feature index independently with probability ``rate``.

    Training-time only; rate 0 is the identity and consumes no random
    draws. No inverted rescaling is applied.
    """
    if not 0 <= rate < 1:
        raise ValidationError("dropout rate must be in [0, 1)")
    if rate == 0 or features.size == 0:
        return features
    keep = rng.random(features.size) >= rate
    return features[keep]


def _prepare_record(record: "TextRecord", config: TrainConfig):
    words = featurizer.split_words(record.text)
    if not 0 <= record.label <= len(words):
        raise ValidationError(
            f"label {record.label} out of range for {len(words)}-word text"
        )
    limit = len(words) if config.max_tokens == 0 else min(len(words), config.max_tokens)
    feats = featurizer.featurize_words(words[:limit], config.seed, config.hash_dim)
    gold = boundary.labels_from_boundary(record.label, len(words))[:limit]
    return feats, gold


def train(dataset: Sequence["TextRecord"], config: TrainConfig) -> Model:
    """Train emitter weights and CRF parameters from boundary-labeled texts.

    Invalid records are skipped with a warning; training fails only if
    nothing valid remains.
    """
    config.validate()
    prepared = []
    for record in dataset:
        try:
            prepared.append(_prepare_record(record, config))
        except ValidationError as exc:
            log.warning("skipping record %r: %s", getattr(record, "id", "?"), exc)
    if not prepared:
        raise ValidationError("no valid training records")

    params = {
        "weights": np.zeros((config.hash_dim, crf.N_LABELS)),
        "start": np.zeros(crf.N_LABELS),
        "transition": np.zeros((crf.N_LABELS, crf.N_LABELS)),
        "end": np.zeros(crf.N_LABELS),
    }
    state = AdamState.for_params(params)
    rng = np.random.default_rng(config.seed)
    emitter = featurizer.EmitterWeights(params["weights"], config.seed, config.hash_dim)

    epoch_nll = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(prepared))
        total = 0.0
        for index in order:
            feats, gold = prepared[index]
            if config.dropout_rate > 0:
                feats = [apply_feature_dropout(f, config.dropout_rate, rng) for f in feats]
            emissions = featurizer.scores_for_features(feats, emitter)
            crf_params = crf.CrfParams(params["start"], params["transition"], params["end"])
            nll, d_emissions, d_crf = crf.nll_grad(emissions, crf_params, gold)
            grads = {
                "weights": featurizer.accumulate_weight_grad(d_emissions, feats, config.hash_dim),
                "start": d_crf.start,
                "transition": d_crf.transition,
                "end": d_crf.end,
            }
            adam_step(params, grads, state, config.learning_rate, config.weight_decay)
            total += nll
        epoch_nll.append(total / len(prepared))
        log.info("epoch %d/%d mean NLL %.6f", epoch + 1, config.epochs, epoch_nll[-1])

    return Model(
        emitter_weights=featurizer.EmitterWeights(params["weights"], config.seed, config.hash_dim),
        crf_params=crf.CrfParams(params["start"], params["transition"], params["end"]),
        config=config,
        epoch_nll=epoch_nll,
    )


@dataclass(frozen=True)
class BoundaryPrediction:
    id: str
    boundary: int


def predict(
    model: Model,
    text: str,
    approach: int = 2,
    external_emissions: "EmissionRecord | None" = None,
) -> int:
    """Predicted word index where machine-generated text begins.

    Emissions come from the built-in emitter unless an external record is
    supplied; decoding runs Viterbi, aggregates tokens to words, then
    applies the requested boundary approach.
    """
    if approach not in (1, 2):
        raise ValidationError(f"approach must be 1 or 2, got {approach}")
    words = featurizer.split_words(text)
    n = len(words)
    if external_emissions is not None:
        emissions = external_emissions.to_matrix()
        if int(emissions.word_index[-1]) >= n:
            raise ValidationError(
                f"external emissions cover word {int(emissions.word_index[-1])} "
                f"but the text has only {n} words"
            )
    else:
        limit = n if model.config.max_tokens == 0 else min(n, model.config.max_tokens)
        emissions = featurizer.emission_scores(words[:limit], model.emitter_weights)
    token_labels, _ = crf.viterbi(emissions, model.crf_params)
    word_labels = boundary.word_labels_from_tokens(token_labels, emissions.word_index, n)
    if approach == 1:
        return boundary.decode_boundary_a1(word_labels)
    return boundary.decode_boundary_a2(word_labels)


def predict_dataset(
    model: Model,
    records: Sequence["TextRecord"],
    approach: int = 2,
    emissions_by_id: "dict[str, EmissionRecord] | None" = None,
) -> list[BoundaryPrediction]:
    """Predict every record, optionally with externally supplied emissions."""
    out = []
    for record in records:
        external = None
        if emissions_by_id is not None:
            if record.id not in emissions_by_id:
                raise ValidationError(f"no emissions for record {record.id!r}")
            external = emissions_by_id[record.id]
        out.append(
            BoundaryPrediction(record.id, predict(model, record.text, approach, external))
        )
    return out
