"""Encoder pooling, the MLP fusion head, loss and analytic gradients.

The classifier concatenates one vector per active input component
(code change, todo comment, commit message) and pushes it through three
ReLU hidden layers into a single sigmoid output. All math is plain numpy;
gradients are derived by hand and checked against finite differences in
the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .vocab import PAD_INDEX

LOSS_EPS = 1e-7
_SCORE_FLOOR = np.nextafter(0.0, 1.0)
_SCORE_CEIL = np.nextafter(1.0, 0.0)


class ShapeMismatch(ValueError):
    pass


class Component(Enum):
    CC = "cc"
    TD = "td"
    MSG = "msg"


# Concatenation order is fixed; never iterate a set of components.
COMPONENT_ORDER = (Component.CC, Component.TD, Component.MSG)


@dataclass
class EncoderParams:
    embedding: np.ndarray  # (vocab, dim)

    @property
    def dim(self) -> int:
        return self.embedding.shape[1]


@dataclass
class MlpParams:
    weights: list[np.ndarray]  # weights[i]: (in_dim, out_dim)
    biases: list[np.ndarray]
    dropout_rate: float = 0.2

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]


@dataclass
class Gradients:
    mlp_w: list[np.ndarray]
    mlp_b: list[np.ndarray]
    emb: dict[Component, np.ndarray] = field(default_factory=dict)

    def arrays(self) -> list[np.ndarray]:
        out = list(self.mlp_w) + list(self.mlp_b)
        for component in COMPONENT_ORDER:
            if component in self.emb:
                out.append(self.emb[component])
        return out


def default_hidden_sizes(dim: int) -> tuple[int, int, int]:
    """Pyramid of three hidden widths scaled to the encoder width.

    Widths are floored at 8: narrower ReLU layers die too easily under
    zero-bias init with small-scale embedding inputs.
    """
    if dim == 768:
        return (256, 128, 64)
    start = max(dim // 2, 8)
    return (start, max(start // 2, 8), max(start // 4, 8))


def init_encoder(rng: np.random.Generator, vocab_size: int, dim: int) -> EncoderParams:
    table = rng.uniform(-0.05, 0.05, size=(vocab_size, dim))
    table[PAD_INDEX] = 0.0
    return EncoderParams(embedding=table)


def init_mlp(
    rng: np.random.Generator,
    input_dim: int,
    hidden_sizes: Sequence[int],
    dropout_rate: float = 0.2,
) -> MlpParams:
    sizes = [input_dim, *hidden_sizes, 1]
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights=weights, biases=biases, dropout_rate=dropout_rate)


def mean_pool(ids: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Mean of the embedding rows of non-PAD tokens; zero when all PAD."""
    ids = np.atleast_2d(np.asarray(ids))
    mask = ids != PAD_INDEX
    counts = np.maximum(mask.sum(axis=1), 1)
    summed = (table[ids] * mask[:, :, None]).sum(axis=1)
    return summed / counts[:, None]


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class ForwardCache:
    layer_inputs: list[np.ndarray]  # post-dropout input to each dense layer
    preacts: list[np.ndarray]
    masks: list[Optional[np.ndarray]]
    scores: np.ndarray
    part_dims: list[int]
    squeeze: bool


def forward(
    h_c: Optional[np.ndarray],
    h_t: Optional[np.ndarray],
    h_m: Optional[np.ndarray],
    mlp: MlpParams,
    train_mode: bool = False,
    rng: Optional[np.random.Generator] = None,
):
    """Score one sample or a batch; returns (scores, cache).

    Masked components are passed as None and contribute no width. In train
    mode an inverted-scaling dropout mask is drawn before every dense
    layer, so inference needs no rescaling.
    """
    parts = [h for h in (h_c, h_t, h_m) if h is not None]
    if not parts:
        raise ShapeMismatch("at least one component vector is required")
    squeeze = parts[0].ndim == 1
    parts = [np.atleast_2d(p) for p in parts]
    batch = parts[0].shape[0]
    if any(p.shape[0] != batch for p in parts):
        raise ShapeMismatch("component batches differ in size")
    z = np.concatenate(parts, axis=1)
    if z.shape[1] != mlp.input_dim:
        raise ShapeMismatch(
            f"concatenated width {z.shape[1]} != mlp input width {mlp.input_dim}"
        )
    if train_mode and rng is None:
        raise ValueError("train_mode requires an rng for dropout")

    layer_inputs: list[np.ndarray] = []
    preacts: list[np.ndarray] = []
    masks: list[Optional[np.ndarray]] = []
    last = len(mlp.weights) - 1
    for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        if train_mode and mlp.dropout_rate > 0.0:
            keep = 1.0 - mlp.dropout_rate
            mask = (rng.random(z.shape) < keep) / keep
            z = z * mask
        else:
            mask = None
        masks.append(mask)
        layer_inputs.append(z)
        a = z @ w + b
        preacts.append(a)
        z = np.maximum(a, 0.0) if i < last else a

    logits = z[:, 0]
    scores = np.clip(_sigmoid(logits), _SCORE_FLOOR, _SCORE_CEIL)
    cache = ForwardCache(
        layer_inputs=layer_inputs,
        preacts=preacts,
        masks=masks,
        scores=scores,
        part_dims=[p.shape[1] for p in parts],
        squeeze=squeeze,
    )
    return (scores[0] if squeeze else scores), cache


def bce_loss(score, label) -> float:
    """Binary cross entropy with scores clamped into [eps, 1-eps].

    Accepts scalars or arrays; arrays reduce to the batch mean.
    """
    s = np.clip(np.asarray(score, dtype=float), LOSS_EPS, 1.0 - LOSS_EPS)
    y = np.asarray(label, dtype=float)
    losses = -(y * np.log(s) + (1.0 - y) * np.log(1.0 - s))
    return float(np.mean(losses))


def mlp_backward(mlp: MlpParams, cache: ForwardCache, label) -> tuple[Gradients, np.ndarray]:
    """Gradients of the mean BCE loss for the MLP, plus d(loss)/d(inputs).

    The returned input gradient is split-ready: callers slice it per
    component with cache.part_dims. Dropout masks are reused from the
    forward pass; scores pushed into the loss clamp get zero gradient,
    matching the implemented (clamped) loss exactly.
    """
    scores = cache.scores
    y = np.atleast_1d(np.asarray(label, dtype=float))
    if y.shape[0] != scores.shape[0]:
        raise ShapeMismatch(f"{y.shape[0]} labels for {scores.shape[0]} scores")
    batch = scores.shape[0]
    inner = (scores > LOSS_EPS) & (scores < 1.0 - LOSS_EPS)
    g = np.where(inner, scores - y, 0.0)[:, None] / batch

    grad_w: list[np.ndarray] = [np.empty(0)] * len(mlp.weights)
    grad_b: list[np.ndarray] = [np.empty(0)] * len(mlp.biases)
    for i in range(len(mlp.weights) - 1, -1, -1):
        x = cache.layer_inputs[i]
        grad_w[i] = x.T @ g
        grad_b[i] = g.sum(axis=0)
        gx = g @ mlp.weights[i].T
        if cache.masks[i] is not None:
            gx = gx * cache.masks[i]
        if i > 0:
            g = gx * (cache.preacts[i - 1] > 0)
        else:
            d_input = gx
    return Gradients(mlp_w=grad_w, mlp_b=grad_b), d_input


def embedding_gradient(
    d_h: np.ndarray, ids: np.ndarray, vocab_size: int, dim: int
) -> np.ndarray:
    """Scatter mean-pooling gradients back onto the embedding table."""
    ids = np.atleast_2d(np.asarray(ids))
    d_h = np.atleast_2d(d_h)
    grad = np.zeros((vocab_size, dim))
    mask = ids != PAD_INDEX
    counts = np.maximum(mask.sum(axis=1), 1)
    contrib = d_h / counts[:, None]
    repeated = np.repeat(contrib, mask.sum(axis=1), axis=0)
    np.add.at(grad, ids[mask], repeated)
    return grad
