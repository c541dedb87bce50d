"""Trainable three-encoder classifier with an MLP fusion head."""

from .network import (
    Component,
    EncoderParams,
    Gradients,
    MlpParams,
    ShapeMismatch,
    bce_loss,
    forward,
    init_encoder,
    init_mlp,
    mean_pool,
    mlp_backward,
)
from .optimizer import AdamState, adam_step, clip_gradients, global_norm
from .storage import (
    ExternalVectorStore,
    MissingExternalVector,
    load_model,
    save_model,
    text_hash,
    write_external_vectors,
)
from .training import (
    ModelParams,
    Prediction,
    TrainConfig,
    TrainHistory,
    component_text,
    parse_mask,
    predict,
    predict_scores,
    train,
)
from .vocab import EmptyCorpus, Vocab, build_vocab, tokenize_for_model

__all__ = [
    "AdamState",
    "Component",
    "EmptyCorpus",
    "EncoderParams",
    "ExternalVectorStore",
    "Gradients",
    "MissingExternalVector",
    "MlpParams",
    "ModelParams",
    "Prediction",
    "ShapeMismatch",
    "TrainConfig",
    "TrainHistory",
    "Vocab",
    "adam_step",
    "bce_loss",
    "build_vocab",
    "clip_gradients",
    "component_text",
    "forward",
    "global_norm",
    "parse_mask",
    "init_encoder",
    "init_mlp",
    "load_model",
    "mean_pool",
    "mlp_backward",
    "predict",
    "predict_scores",
    "save_model",
    "text_hash",
    "tokenize_for_model",
    "train",
    "write_external_vectors",
]
