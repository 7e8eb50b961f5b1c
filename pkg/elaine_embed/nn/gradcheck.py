import typing as t

import numpy as np

from elaine_embed.graph import FloatArray


def numerical_gradient(
    loss: t.Callable[[], float], params: t.Sequence[FloatArray], h: float = 1e-5
) -> list[FloatArray]:
    """Central finite differences of `loss()` w.r.t. every entry of `params`.

    Entries are perturbed in place and restored.
    """
    grads: list[FloatArray] = []
    for p in params:
        g = np.zeros_like(p)
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            upper = loss()
            flat[i] = original - h
            lower = loss()
            flat[i] = original
            gflat[i] = (upper - lower) / (2.0 * h)
        grads.append(g)
    return grads


def relative_error(
    analytic: FloatArray, numeric: FloatArray, floor: float = 1e-4
) -> FloatArray:
    return np.abs(analytic - numeric) / np.maximum(
        np.abs(analytic) + np.abs(numeric), floor
    )


def max_relative_error(
    analytic: t.Sequence[FloatArray], numeric: t.Sequence[FloatArray]
) -> float:
    return max(
        (float(relative_error(a, n).max(initial=0.0)) for a, n in zip(analytic, numeric)),
        default=0.0,
    )
