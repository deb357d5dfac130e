"""The five reference predictors evaluated by the experiment harness.

Model A reproduces the generative posterior exactly; B and C rescale its
steepness (over- and under-confident); D adds a constant bias clipped at 1;
E ignores the input entirely and predicts uniform noise. Scores serialise
under the single letters A-E.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .generative import posterior

__all__ = [
    "MODEL_LETTERS",
    "ModelKind",
    "ModelSpec",
    "default_models",
    "predict",
]


class ModelKind(str, Enum):
    POSTERIOR_MATCHING = "A"
    OVERCONFIDENT = "B"
    UNDERCONFIDENT = "C"
    BIASED_HIGH = "D"
    RANDOM = "E"


MODEL_LETTERS = tuple(kind.value for kind in ModelKind)


@dataclass(frozen=True)
class ModelSpec:
    """A predictor kind plus its miscalibration parameters.

    The factor and bias defaults define the reference zoo; they are fields so
    sensitivity variants can be built without new code.
    """

    kind: ModelKind
    over_factor: float = 3.0
    under_factor: float = 0.4
    bias: float = 0.15

    @property
    def letter(self) -> str:
        return self.kind.value


def default_models() -> tuple[ModelSpec, ...]:
    """All five reference models in letter order."""
    return tuple(ModelSpec(kind) for kind in ModelKind)


def predict(
    spec: ModelSpec,
    x,
    k: float,
    rng: np.random.Generator | None = None,
):
    """Predicted positive-class probability of ``spec`` at input ``x``.

    ``rng`` is consumed only by the random model (kind E), which draws one
    uniform prediction per sample independent of ``x``.
    """
    arr = np.asarray(x, dtype=float)
    if spec.kind is ModelKind.RANDOM:
        if rng is None:
            raise ValueError("the random model requires a seeded generator")
        out = rng.uniform(0.0, 1.0, size=arr.shape)
    elif spec.kind is ModelKind.POSTERIOR_MATCHING:
        out = posterior(arr, k)
    elif spec.kind is ModelKind.OVERCONFIDENT:
        out = posterior(arr, spec.over_factor * k)
    elif spec.kind is ModelKind.UNDERCONFIDENT:
        out = posterior(arr, spec.under_factor * k)
    elif spec.kind is ModelKind.BIASED_HIGH:
        out = np.minimum(posterior(arr, k) + spec.bias, 1.0)
    else:
        raise ValueError(f"unknown model kind: {spec.kind!r}")
    return float(out) if arr.ndim == 0 else out
