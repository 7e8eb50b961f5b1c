import enum
import typing as t

import msgspec
import numpy as np
from scipy.special import expit

from elaine_embed.errors import ContractViolation
from elaine_embed.graph import FloatArray


class Activation(enum.StrEnum):
    SIGMOID = "sigmoid"
    RELU = "relu"
    IDENTITY = "identity"


def activate(activation: Activation, z: FloatArray) -> FloatArray:
    match activation:
        case Activation.SIGMOID:
            return expit(z)
        case Activation.RELU:
            return np.maximum(z, 0.0)
        case Activation.IDENTITY:
            return z


def activation_grad(activation: Activation, z: FloatArray, a: FloatArray) -> FloatArray:
    """Elementwise derivative of the activation at pre-activation `z` (output `a`)."""
    match activation:
        case Activation.SIGMOID:
            return a * (1.0 - a)
        case Activation.RELU:
            return (z > 0).astype(np.float64)
        case Activation.IDENTITY:
            return np.ones_like(z)


class DenseLayer(msgspec.Struct):
    W: FloatArray
    """in×out"""
    b: FloatArray
    activation: Activation

    @classmethod
    def init(
        cls,
        fan_in: int,
        fan_out: int,
        activation: Activation,
        rng: np.random.Generator,
    ) -> t.Self:
        """Glorot-uniform weights, zero bias."""
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return cls(
            W=rng.uniform(-bound, bound, size=(fan_in, fan_out)),
            b=np.zeros(fan_out),
            activation=activation,
        )

    @property
    def fan_in(self) -> int:
        return self.W.shape[0]

    @property
    def fan_out(self) -> int:
        return self.W.shape[1]


class LayerCache(msgspec.Struct, frozen=True):
    x: FloatArray
    z: FloatArray
    a: FloatArray


class LayerStack(msgspec.Struct):
    layers: list[DenseLayer]

    @classmethod
    def init(
        cls,
        sizes: t.Sequence[int],
        hidden: Activation,
        output: Activation,
        rng: np.random.Generator,
    ) -> t.Self:
        """Stack mapping sizes[0] → ... → sizes[-1]; last layer uses `output`."""
        layers = [
            DenseLayer.init(
                fan_in,
                fan_out,
                output if i == len(sizes) - 2 else hidden,
                rng,
            )
            for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:]))
        ]
        return cls(layers=layers)

    @property
    def in_width(self) -> int:
        return self.layers[0].fan_in

    @property
    def out_width(self) -> int:
        return self.layers[-1].fan_out

    def parameters(self) -> list[FloatArray]:
        """[W0, b0, W1, b1, ...]; the arrays themselves, not copies."""
        return [p for layer in self.layers for p in (layer.W, layer.b)]

    def weights(self) -> list[FloatArray]:
        return [layer.W for layer in self.layers]


def forward(mlp: LayerStack, X: FloatArray) -> tuple[FloatArray, list[LayerCache]]:
    if X.ndim != 2 or X.shape[1] != mlp.in_width:
        raise ContractViolation(
            f"Input of shape {X.shape} does not fit a stack with input width {mlp.in_width}"
        )
    cache: list[LayerCache] = []
    a = X
    for layer in mlp.layers:
        z = a @ layer.W + layer.b
        out = activate(layer.activation, z)
        cache.append(LayerCache(x=a, z=z, a=out))
        a = out
    return a, cache


def backward(
    mlp: LayerStack, upstream_grad: FloatArray, cache: list[LayerCache]
) -> tuple[FloatArray, list[FloatArray]]:
    """Gradients of Σ upstream_grad ⊙ output w.r.t. the input and every parameter.

    Parameter grads come back in `mlp.parameters()` order.
    """
    if len(cache) != len(mlp.layers):
        raise ContractViolation("Cache does not come from a forward pass of this stack")
    grads: list[FloatArray] = []
    delta = upstream_grad
    for layer, step in zip(reversed(mlp.layers), reversed(cache)):
        dz = delta * activation_grad(layer.activation, step.z, step.a)
        grads.append(dz.sum(axis=0))
        grads.append(step.x.T @ dz)
        delta = dz @ layer.W.T
    grads.reverse()
    return delta, grads
