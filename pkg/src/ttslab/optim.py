"""Adam optimizer with a linear learning-rate decay schedule.

Update rule: bias-corrected first/second moments with beta1=0.9, beta2=0.98,
eps=1e-6, and step-t learning rate base_lr * max(0, 1 - t/total_steps). The
step counter is incremented before bias correction, so the rate reaches zero
exactly at t = total_steps.
"""

from dataclasses import dataclass, field

import numpy as np

from ttslab.autodiff import Tensor
from ttslab.errors import ContractError, ShapeError


@dataclass
class AdamState:
    """Per-parameter moment buffers plus the shared schedule."""

    base_lr: float
    total_steps: int
    beta1: float = 0.9
    beta2: float = 0.98
    eps: float = 1e-6
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.total_steps <= 0:
            raise ContractError(f"total_steps must be positive, got {self.total_steps}")

    def lr_at(self, step: int) -> float:
        return self.base_lr * max(0.0, 1.0 - step / self.total_steps)


def adam_step(params: dict, grads: dict, state: AdamState):
    """Apply one Adam update in place; returns (params, state).

    `grads` maps parameter names to arrays; a missing or None entry is a
    zero gradient (the moments still decay, as in standard Adam).
    """
    state.step += 1
    lr = state.lr_at(state.step)
    b1, b2, eps = state.beta1, state.beta2, state.eps
    bc1 = 1.0 - b1 ** state.step
    bc2 = 1.0 - b2 ** state.step
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = 0.0
        elif np.shape(g) != p.shape:
            raise ShapeError(f"adam_step: grad shape {np.shape(g)} != param "
                             f"shape {p.shape} for {name!r}")
        if name not in state.m:
            state.m[name] = np.zeros(p.shape, dtype=np.float64)
            state.v[name] = np.zeros(p.shape, dtype=np.float64)
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        p.data -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    return params, state


def grads_of(params: dict) -> dict:
    """Collect .grad buffers of a parameter dict (None entries preserved)."""
    return {name: p.grad for name, p in params.items()}
