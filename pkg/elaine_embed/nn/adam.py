import typing as t

import msgspec
import numpy as np

from elaine_embed.errors import ContractViolation
from elaine_embed.graph import FloatArray


class AdamState(msgspec.Struct):
    m: list[FloatArray]
    v: list[FloatArray]
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: t.Sequence[FloatArray], lr: float = 1e-3) -> t.Self:
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            lr=lr,
        )


def adam_step(
    state: AdamState, params: list[FloatArray], grads: t.Sequence[FloatArray]
) -> list[FloatArray]:
    """Bias-corrected Adam update, applied in place; returns `params`."""
    if len(params) != len(state.m) or len(grads) != len(params):
        raise ContractViolation(
            f"Adam state tracks {len(state.m)} arrays, got {len(params)} params and {len(grads)} grads"
        )
    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if g.shape != p.shape:
            raise ContractViolation(f"Gradient shape {g.shape} != parameter shape {p.shape}")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g**2
        p -= state.lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps)
    return params
