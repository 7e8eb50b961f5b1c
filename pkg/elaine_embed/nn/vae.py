import typing as t

import msgspec
import numpy as np

from elaine_embed.graph import FloatArray
from elaine_embed.nn.layers import (
    Activation,
    DenseLayer,
    LayerCache,
    LayerStack,
    backward,
    forward,
)

LOGVAR_CLAMP = 10.0


class GaussianHead(msgspec.Struct):
    """Diagonal-Gaussian posterior: two identity layers giving μ and log σ²."""

    mu_layer: LayerStack
    logvar_layer: LayerStack

    @classmethod
    def init(cls, hidden: int, d: int, rng: np.random.Generator) -> t.Self:
        return cls(
            mu_layer=LayerStack(
                layers=[DenseLayer.init(hidden, d, Activation.IDENTITY, rng)]
            ),
            logvar_layer=LayerStack(
                layers=[DenseLayer.init(hidden, d, Activation.IDENTITY, rng)]
            ),
        )

    def parameters(self) -> list[FloatArray]:
        return self.mu_layer.parameters() + self.logvar_layer.parameters()

    def weights(self) -> list[FloatArray]:
        return self.mu_layer.weights() + self.logvar_layer.weights()


class LatentSample(msgspec.Struct, frozen=True):
    z: FloatArray
    mu: FloatArray
    logvar: FloatArray
    """Clamped to [-LOGVAR_CLAMP, LOGVAR_CLAMP]"""
    eps: FloatArray
    clamped: FloatArray
    """1.0 where the raw log-variance was inside the clamp range"""
    mu_cache: list[LayerCache]
    logvar_cache: list[LayerCache]


def encode_head(head: GaussianHead, h: FloatArray) -> FloatArray:
    """Posterior mean only; no sampling."""
    mu, _ = forward(head.mu_layer, h)
    return mu


def sample_latent(head: GaussianHead, h: FloatArray, eps: FloatArray) -> LatentSample:
    """Reparameterised draw z = μ + exp(logvar / 2) ⊙ eps."""
    mu, mu_cache = forward(head.mu_layer, h)
    raw, logvar_cache = forward(head.logvar_layer, h)
    logvar = np.clip(raw, -LOGVAR_CLAMP, LOGVAR_CLAMP)
    z = mu + np.exp(logvar / 2.0) * eps
    return LatentSample(
        z=z,
        mu=mu,
        logvar=logvar,
        eps=eps,
        clamped=(np.abs(raw) <= LOGVAR_CLAMP).astype(np.float64),
        mu_cache=mu_cache,
        logvar_cache=logvar_cache,
    )


def backward_head(
    head: GaussianHead,
    sample: LatentSample,
    dz: FloatArray,
    dmu_extra: FloatArray | None = None,
    dlogvar_extra: FloatArray | None = None,
) -> tuple[FloatArray, list[FloatArray]]:
    """Back-propagate through the sampler and both head layers.

    Returns the gradient w.r.t. the head input and grads in `head.parameters()` order.
    """
    dmu = dz if dmu_extra is None else dz + dmu_extra
    dlogvar = dz * sample.eps * 0.5 * np.exp(sample.logvar / 2.0)
    if dlogvar_extra is not None:
        dlogvar = dlogvar + dlogvar_extra
    dlogvar = dlogvar * sample.clamped

    dh_mu, mu_grads = backward(head.mu_layer, dmu, sample.mu_cache)
    dh_logvar, logvar_grads = backward(head.logvar_layer, dlogvar, sample.logvar_cache)
    return dh_mu + dh_logvar, mu_grads + logvar_grads


def kl_unit_gaussian(mu: FloatArray, logvar: FloatArray) -> float:
    """KL(N(μ, diag exp(logvar)) ‖ N(0, I)), summed over dimensions, averaged over rows."""
    per_row = 0.5 * np.sum(np.exp(logvar) + mu**2 - 1.0 - logvar, axis=1)
    return float(np.mean(per_row))


def kl_unit_gaussian_grad(
    mu: FloatArray, logvar: FloatArray
) -> tuple[FloatArray, FloatArray]:
    batch = mu.shape[0]
    return mu / batch, 0.5 * (np.exp(logvar) - 1.0) / batch
