"""Adam optimizer with bias-corrected moments."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gaitkin.errors import ShapeMismatch


@dataclass
class AdamState:
    """First/second moment accumulators, one pair per weight tensor."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_weights(cls, weights: dict[str, np.ndarray], **kwargs) -> "AdamState":
        return cls(
            m={k: np.zeros_like(v) for k, v in weights.items()},
            v={k: np.zeros_like(v) for k, v in weights.items()},
            **kwargs,
        )


def adam_step(
    weights: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One update; mutates and returns the weight and state dicts."""
    if set(grads) != set(weights):
        raise ShapeMismatch("gradient names do not match weights")
    state.step += 1
    c1 = 1.0 - state.beta1**state.step
    c2 = 1.0 - state.beta2**state.step
    for name, w in weights.items():
        g = grads[name]
        if g.shape != w.shape:
            raise ShapeMismatch(f"{name}: grad shape {g.shape} != weight shape {w.shape}")
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        w -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return weights, state
