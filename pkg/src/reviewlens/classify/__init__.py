from .heads import (
    ClassifierHead,
    bce_loss,
    head_forward,
    head_gradients,
    init_head,
    predict,
    sigmoid,
)
from .encoder import EncoderModel, load_encoder, encode_batch
from .training import (
    TrainConfig,
    FineTunedModel,
    build_context_input,
    classify_corpus,
    train_binary,
    train_multilabel,
    train_multitask,
)

__all__ = [
    "ClassifierHead",
    "EncoderModel",
    "FineTunedModel",
    "TrainConfig",
    "bce_loss",
    "build_context_input",
    "classify_corpus",
    "encode_batch",
    "head_forward",
    "head_gradients",
    "init_head",
    "load_encoder",
    "predict",
    "sigmoid",
    "train_binary",
    "train_multilabel",
    "train_multitask",
]
