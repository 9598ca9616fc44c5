"""Word-level boundary detection between human-written and machine-generated text."""

from .boundary import (
    decode_boundary_a1,
    decode_boundary_a2,
    labels_from_boundary,
    word_labels_from_tokens,
)
from .crf import (
    HUMAN,
    MACHINE,
    CrfParams,
    EmissionMatrix,
    PosteriorMarginals,
    log_partition,
    marginals,
    nll_grad,
    viterbi,
)
from .dataio import (
    EmissionRecord,
    TextRecord,
    load_dataset,
    load_emissions,
    load_model,
    load_predictions,
    render_report,
    save_dataset,
    save_emissions,
    save_model,
    save_predictions,
)
from .errors import ValidationError
from .featurizer import (
    EmitterWeights,
    accumulate_weight_grad,
    emission_scores,
    featurize,
    split_words,
)
from .metrics import (
    EvalResult,
    aggregate_sentence_metrics,
    evaluate_dataset,
    mae,
    mare,
    placement_split,
    sentence_eval,
    split_sentences,
)
from .trainer import (
    AdamState,
    BoundaryPrediction,
    Model,
    TrainConfig,
    adam_step,
    apply_feature_dropout,
    predict,
    predict_dataset,
    train,
)

__version__ = "0.1.0"
