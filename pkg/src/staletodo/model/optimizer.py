"""Gradient clipping and the Adam update."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


def global_norm(arrays: Sequence[np.ndarray]) -> float:
    total = 0.0
    for a in arrays:
        total += float(np.sum(np.square(a)))
    return float(np.sqrt(total))


def clip_gradients(arrays: Sequence[np.ndarray], max_norm: float = 2.0) -> list[np.ndarray]:
    """Scale all gradients down together when their global L2 norm exceeds
    max_norm; otherwise return them unchanged."""
    norm = global_norm(arrays)
    if norm <= max_norm or norm == 0.0:
        return list(arrays)
    scale = max_norm / norm
    return [a * scale for a in arrays]


@dataclass
class AdamState:
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)
    t: int = 0

    @classmethod
    def for_params(cls, params: Sequence[np.ndarray]) -> "AdamState":
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            t=0,
        )


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    lr: float = 0.001,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[list[np.ndarray], AdamState]:
    """Bias-corrected Adam; updates params and state in place."""
    state.t += 1
    t = state.t
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * np.square(g)
        m_hat = state.m[i] / (1.0 - beta1**t)
        v_hat = state.v[i] / (1.0 - beta2**t)
        p -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return list(params), state
