"""Adam with decoupled weight decay and a linear warmup/decay schedule.

Defaults (beta2=0.98, eps=1e-6, weight decay 0.01) follow the RoBERTa recipe.
"""
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .encoder import is_bias, is_norm


def lr_schedule(step: int, total_steps: int, warmup_steps: int, peak: float) -> float:
    if warmup_steps > 0 and step < warmup_steps:
        return peak * step / warmup_steps
    if total_steps <= warmup_steps:
        return peak
    return peak * max(0.0, (total_steps - step) / (total_steps - warmup_steps))


@dataclass
class AdamState:
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.98
    eps: float = 1e-6
    weight_decay: float = 0.01
    m: "OrderedDict[str, np.ndarray]" = field(default_factory=OrderedDict)
    v: "OrderedDict[str, np.ndarray]" = field(default_factory=OrderedDict)

    @classmethod
    def for_params(cls, params, **hyper):
        st = cls(**hyper)
        for k, p in params.items():
            st.m[k] = np.zeros_like(p)
            st.v[k] = np.zeros_like(p)
        return st

    def hyperparams(self) -> dict:
        return {"beta1": self.beta1, "beta2": self.beta2, "eps": self.eps, "weight_decay": self.weight_decay}


def decays(name: str) -> bool:
    return not (is_bias(name) or is_norm(name))


def adam_step(params, grads, state: AdamState, lr: float):
    """Update ``params`` and ``state`` in place; returns both for convenience."""
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient in tensor {name!r} at step {state.step + 1}")
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for name, p in params.items():
        g = grads[name]
        m, v = state.m[name], state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        if state.weight_decay and decays(name):
            p -= p.dtype.type(lr * state.weight_decay) * p
        p -= (lr * (m / c1) / (np.sqrt(v / c2) + state.eps)).astype(p.dtype)
    return params, state
