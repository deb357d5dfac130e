"""Two-class Gaussian generative model with an analytic posterior.

Inputs come from a uniform distribution so that every level of posterior
uncertainty is well represented; the posterior of the positive class is the
logistic sigmoid of ``k * x`` where ``k`` is the class-separation steepness.
A brute-force density-ratio oracle computes the same posterior without the
closed form, providing an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

__all__ = [
    "HARD_MODES",
    "GaussianPair",
    "GenerativeConfig",
    "LabeledDataset",
    "bernoulli_labels",
    "make_dataset",
    "posterior",
    "posterior_oracle",
    "sample_inputs",
    "threshold_labels",
]

HARD_MODES = ("threshold", "bernoulli")


@dataclass(frozen=True)
class GenerativeConfig:
    """Sampling configuration: steepness ``k``, sample count, and input range."""

    k: float
    n: int
    input_low: float = -3.0
    input_high: float = 3.0

    def __post_init__(self) -> None:
        if not (isinstance(self.k, (int, float)) and math.isfinite(self.k) and self.k > 0):
            raise ValueError(f"k must be a positive finite scalar, got {self.k!r}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (math.isfinite(self.input_low) and math.isfinite(self.input_high)):
            raise ValueError("input range must be finite")
        if not self.input_low < self.input_high:
            raise ValueError("input_low must be strictly below input_high")


@dataclass(frozen=True)
class GaussianPair:
    """Class-conditional densities N(+mu, sigma^2) and N(-mu, sigma^2) with equal priors."""

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not (isinstance(self.mu, (int, float)) and math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"mu must be a positive finite scalar, got {self.mu!r}")
        if not (isinstance(self.sigma, (int, float)) and math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be a positive finite scalar, got {self.sigma!r}")

    @property
    def steepness(self) -> float:
        """The sigmoid steepness implied by this pair: 2 * mu / sigma^2."""
        return 2.0 * self.mu / self.sigma**2


@dataclass(eq=False)
class LabeledDataset:
    """Sampled inputs with their soft labels and one hard-label realisation."""

    inputs: np.ndarray
    soft_labels: np.ndarray
    hard_labels: np.ndarray
    hard_mode: str
    steepness: float

    def __post_init__(self) -> None:
        if not (len(self.inputs) == len(self.soft_labels) == len(self.hard_labels)):
            raise ValueError("inputs, soft_labels and hard_labels must have equal length")
        if self.hard_mode not in HARD_MODES:
            raise ValueError(f"hard_mode must be one of {HARD_MODES}, got {self.hard_mode!r}")

    @property
    def n(self) -> int:
        return len(self.inputs)


def posterior(x, k: float):
    """Positive-class posterior 1 / (1 + exp(-k * x)).

    Accepts a scalar or an array; the result matches the input shape.
    """
    _check_steepness(k)
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("x must be finite")
    out = expit(k * arr)
    return float(out) if arr.ndim == 0 else out


def posterior_oracle(x, pair: GaussianPair):
    """Posterior via the explicit density ratio P1 / (P0 + P1).

    Both class-conditional Gaussian densities are evaluated in log space and
    combined with shifted exponents, because the raw densities underflow for
    |x - mu| beyond roughly 38 sigma. No closed-form simplification of the
    exponent difference is applied, so this is an independent route to the
    same posterior.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("x must be finite")
    inv_two_var = 1.0 / (2.0 * pair.sigma**2)
    log_norm = -0.5 * math.log(2.0 * math.pi * pair.sigma**2)
    log_p1 = log_norm - (arr - pair.mu) ** 2 * inv_two_var
    log_p0 = log_norm - (arr + pair.mu) ** 2 * inv_two_var
    shift = np.maximum(log_p0, log_p1)
    p1 = np.exp(log_p1 - shift)
    p0 = np.exp(log_p0 - shift)
    out = p1 / (p0 + p1)
    return float(out) if arr.ndim == 0 else out


def sample_inputs(config: GenerativeConfig, rng: np.random.Generator) -> np.ndarray:
    """``config.n`` i.i.d. uniform draws on [input_low, input_high)."""
    return rng.uniform(config.input_low, config.input_high, size=config.n)


def threshold_labels(inputs) -> np.ndarray:
    """Deterministic hard labels 1[x >= 0]; the boundary x == 0 maps to 1."""
    return (np.asarray(inputs, dtype=float) >= 0.0).astype(np.int64)


def bernoulli_labels(soft_labels, rng: np.random.Generator) -> np.ndarray:
    """One Bernoulli realisation per soft label."""
    soft = np.asarray(soft_labels, dtype=float)
    return (rng.random(soft.shape) < soft).astype(np.int64)


def make_dataset(
    config: GenerativeConfig, hard_mode: str, rng: np.random.Generator
) -> LabeledDataset:
    """Sample a dataset: uniform inputs, sigmoid soft labels, one hard-label draw.

    Threshold mode sets y = 1[x >= 0]; bernoulli mode draws y from the soft
    label. Both are deterministic given the generator state and the mode.
    """
    if hard_mode not in HARD_MODES:
        raise ValueError(f"hard_mode must be one of {HARD_MODES}, got {hard_mode!r}")
    x = sample_inputs(config, rng)
    soft = posterior(x, config.k)
    if hard_mode == "threshold":
        hard = threshold_labels(x)
    else:
        hard = bernoulli_labels(soft, rng)
    return LabeledDataset(
        inputs=x,
        soft_labels=soft,
        hard_labels=hard,
        hard_mode=hard_mode,
        steepness=config.k,
    )


def _check_steepness(k: float) -> None:
    if not (isinstance(k, (int, float)) and math.isfinite(k) and k > 0):
        raise ValueError(f"k must be a positive finite scalar, got {k!r}")
