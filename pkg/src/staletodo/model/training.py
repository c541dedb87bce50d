"""Supervised training loop and online prediction.

Training is deterministic given the seed: parameter init, epoch shuffles
and dropout all come from one generator, and the validation history is
bit-identical across runs. Every validate_every batches the validation F1
is computed and the best-scoring parameters (earliest on ties) are the
ones returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..corpus import DatasetSplit, Label, TripleSample
from ..metrics import Status, confusion, metrics
from .network import (
    COMPONENT_ORDER,
    Component,
    EncoderParams,
    MlpParams,
    bce_loss,
    default_hidden_sizes,
    embedding_gradient,
    forward,
    init_encoder,
    init_mlp,
    mean_pool,
    mlp_backward,
)
from .optimizer import AdamState, adam_step, clip_gradients
from .storage import ExternalVectorStore
from .vocab import Vocab, build_vocab, make_vocab

INTERNAL = "internal"
EXTERNAL = "external"
EXTERNAL_DIM = 768
DECISION_THRESHOLD = 0.5


@dataclass
class TrainConfig:
    batch_size: int = 32
    learning_rate: float = 0.001
    grad_clip_norm: float = 2.0
    validate_every: int = 1000
    max_epochs: int = 10
    seed: int = 0
    component_mask: frozenset[Component] = frozenset(COMPONENT_ORDER)
    backend: str = INTERNAL
    dim: int = 128
    min_freq: int = 2
    max_len_cc: int = 200
    max_len_td: int = 30
    max_len_msg: int = 30
    hidden_sizes: Optional[tuple[int, ...]] = None
    dropout_rate: float = 0.2

    def __post_init__(self):
        if not self.component_mask:
            raise ValueError("component_mask must not be empty")
        if self.backend not in (INTERNAL, EXTERNAL):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.backend == EXTERNAL:
            self.dim = EXTERNAL_DIM
        if isinstance(self.component_mask, (list, tuple, set)):
            self.component_mask = frozenset(self.component_mask)

    def active_components(self) -> tuple[Component, ...]:
        return tuple(c for c in COMPONENT_ORDER if c in self.component_mask)

    def max_len(self, component: Component) -> int:
        return {
            Component.CC: self.max_len_cc,
            Component.TD: self.max_len_td,
            Component.MSG: self.max_len_msg,
        }[component]


def parse_mask(spec: str) -> frozenset[Component]:
    parts = [p.strip().lower() for p in spec.split(",") if p.strip()]
    return frozenset(Component(p) for p in parts)


def component_text(sample: TripleSample, component: Component) -> str:
    if component is Component.CC:
        return sample.code_change
    if component is Component.TD:
        return sample.todo_comment
    return sample.commit_msg


@dataclass(frozen=True)
class Prediction:
    score: float
    status: Status
    sample: TripleSample


@dataclass(frozen=True)
class ValidationPoint:
    batch: int
    epoch: int
    train_loss: float
    val_f1: Optional[float]


@dataclass
class TrainHistory:
    validations: list[ValidationPoint] = field(default_factory=list)
    best_batch: int = -1
    final_batch: int = 0
    diverged: bool = False


@dataclass
class ModelParams:
    vocab: Vocab
    encoders: dict[Component, EncoderParams]
    mlp: MlpParams
    config: TrainConfig
    adam: Optional[AdamState] = None


def _encode_samples(
    samples: Sequence[TripleSample],
    config: TrainConfig,
    vocab: Vocab,
    store: Optional[ExternalVectorStore],
) -> dict[Component, np.ndarray]:
    """Precompute per-component model inputs: id matrices or fixed vectors."""
    encoded: dict[Component, np.ndarray] = {}
    for component in config.active_components():
        if config.backend == INTERNAL:
            max_len = config.max_len(component)
            ids = np.array(
                [vocab.encode_text(component_text(s, component), max_len) for s in samples],
                dtype=np.int64,
            )
            encoded[component] = ids
        else:
            encoded[component] = np.stack(
                [store.lookup(component_text(s, component)) for s in samples]
            )
    return encoded


def _component_vectors(
    encoded: dict[Component, np.ndarray],
    idx: Optional[np.ndarray],
    config: TrainConfig,
    encoders: dict[Component, EncoderParams],
) -> dict[Component, np.ndarray]:
    vectors = {}
    for component in config.active_components():
        data = encoded[component] if idx is None else encoded[component][idx]
        if config.backend == INTERNAL:
            vectors[component] = mean_pool(data, encoders[component].embedding)
        else:
            vectors[component] = data
    return vectors


def _as_parts(
    vectors: dict[Component, np.ndarray]
) -> tuple[Optional[np.ndarray], Optional[np.ndarray], Optional[np.ndarray]]:
    return (
        vectors.get(Component.CC),
        vectors.get(Component.TD),
        vectors.get(Component.MSG),
    )


def _scores(
    samples_encoded: dict[Component, np.ndarray],
    config: TrainConfig,
    encoders: dict[Component, EncoderParams],
    mlp: MlpParams,
) -> np.ndarray:
    vectors = _component_vectors(samples_encoded, None, config, encoders)
    scores, _ = forward(*_as_parts(vectors), mlp, train_mode=False)
    return np.atleast_1d(scores)


def _val_f1(scores: np.ndarray, labels: Sequence[Label]) -> Optional[float]:
    statuses = [
        Status.RESOLVED if s >= DECISION_THRESHOLD else Status.UNRESOLVED for s in scores
    ]
    return metrics(confusion(statuses, list(labels))).f1


def _snapshot(mlp: MlpParams, encoders: dict[Component, EncoderParams]) -> dict:
    return {
        "w": [w.copy() for w in mlp.weights],
        "b": [b.copy() for b in mlp.biases],
        "emb": {c: e.embedding.copy() for c, e in encoders.items()},
    }


def train(
    split: DatasetSplit,
    config: TrainConfig,
    store: Optional[ExternalVectorStore] = None,
) -> tuple[ModelParams, TrainHistory]:
    """Train on split.train, checkpointing on split.val F1.

    A non-finite training loss aborts the loop and the model from the most
    recent finite checkpoint is returned with history.diverged set.
    """
    if not split.train or not split.val:
        raise ValueError("train and validation sets must be non-empty")
    if config.backend == EXTERNAL and store is None:
        raise ValueError("external backend requires a vector store")

    rng = np.random.default_rng(config.seed)
    active = config.active_components()

    if config.backend == INTERNAL:
        vocab_texts = [component_text(s, c) for s in split.train for c in active]
        vocab = build_vocab(vocab_texts, min_freq=config.min_freq)
        encoders = {c: init_encoder(rng, len(vocab), config.dim) for c in active}
    else:
        vocab = make_vocab([])
        encoders = {}

    hidden = config.hidden_sizes or default_hidden_sizes(config.dim)
    mlp = init_mlp(rng, config.dim * len(active), hidden, config.dropout_rate)

    train_encoded = _encode_samples(split.train, config, vocab, store)
    val_encoded = _encode_samples(split.val, config, vocab, store)
    y_train = np.array([1.0 if s.label is Label.POSITIVE else 0.0 for s in split.train])
    val_labels = [s.label for s in split.val]

    params_list = list(mlp.weights) + list(mlp.biases) + [
        encoders[c].embedding for c in active if c in encoders
    ]
    adam = AdamState.for_params(params_list)

    history = TrainHistory()
    initial = _snapshot(mlp, encoders)
    best_f1 = -math.inf
    best: Optional[dict] = None
    last_checkpoint: Optional[dict] = None
    n_train = len(split.train)
    batches_done = 0
    running_loss = 0.0
    running_batches = 0

    def validate(epoch: int) -> None:
        nonlocal best_f1, best, last_checkpoint, running_loss, running_batches
        scores = _scores(val_encoded, config, encoders, mlp)
        f1 = _val_f1(scores, val_labels)
        avg_loss = running_loss / running_batches if running_batches else float("nan")
        history.validations.append(
            ValidationPoint(batch=batches_done, epoch=epoch, train_loss=avg_loss, val_f1=f1)
        )
        running_loss = 0.0
        running_batches = 0
        last_checkpoint = _snapshot(mlp, encoders)
        comparable = -1.0 if f1 is None else f1
        if comparable > best_f1:
            best_f1 = comparable
            best = last_checkpoint
            history.best_batch = batches_done

    diverged = False
    for epoch in range(config.max_epochs):
        order = rng.permutation(n_train)
        for start in range(0, n_train, config.batch_size):
            idx = order[start : start + config.batch_size]
            vectors = _component_vectors(train_encoded, idx, config, encoders)
            scores, cache = forward(
                *_as_parts(vectors), mlp, train_mode=True, rng=rng
            )
            labels = y_train[idx]
            loss = bce_loss(scores, labels)
            if not math.isfinite(loss):
                diverged = True
                break
            grads, d_input = mlp_backward(mlp, cache, labels)
            grad_list = list(grads.mlp_w) + list(grads.mlp_b)
            if config.backend == INTERNAL:
                offset = 0
                for component in active:
                    width = config.dim
                    d_h = d_input[:, offset : offset + width]
                    offset += width
                    grad_list.append(
                        embedding_gradient(
                            d_h,
                            train_encoded[component][idx],
                            len(vocab),
                            config.dim,
                        )
                    )
            grad_list = clip_gradients(grad_list, config.grad_clip_norm)
            adam_step(params_list, grad_list, adam, lr=config.learning_rate)
            batches_done += 1
            running_loss += loss
            running_batches += 1
            if config.validate_every > 0 and batches_done % config.validate_every == 0:
                validate(epoch)
        if diverged:
            break

    if not diverged and running_batches:
        validate(config.max_epochs - 1)

    history.final_batch = batches_done
    history.diverged = diverged

    chosen = best if best is not None else (last_checkpoint or initial)
    mlp_out = MlpParams(
        weights=[w.copy() for w in chosen["w"]],
        biases=[b.copy() for b in chosen["b"]],
        dropout_rate=config.dropout_rate,
    )
    encoders_out = {
        c: EncoderParams(embedding=chosen["emb"][c].copy()) for c in chosen["emb"]
    }
    model = ModelParams(
        vocab=vocab, encoders=encoders_out, mlp=mlp_out, config=config, adam=adam
    )
    return model, history


def predict_scores(
    samples: Sequence[TripleSample],
    model: ModelParams,
    store: Optional[ExternalVectorStore] = None,
) -> np.ndarray:
    """Dropout-free scores for a batch of samples."""
    config = model.config
    if config.backend == EXTERNAL and store is None:
        raise ValueError("external backend requires a vector store")
    encoded = _encode_samples(samples, config, model.vocab, store)
    return _scores(encoded, config, model.encoders, model.mlp)


def predict(
    sample: TripleSample,
    model: ModelParams,
    store: Optional[ExternalVectorStore] = None,
) -> Prediction:
    """Score one sample; resolved iff the score reaches 0.5."""
    score = float(predict_scores([sample], model, store)[0])
    status = Status.RESOLVED if score >= DECISION_THRESHOLD else Status.UNRESOLVED
    return Prediction(score=score, status=status, sample=sample)
