"""Binned calibration metrics against probabilistic (soft) and binary (hard) labels.

The central quantity is the bin-weighted mean absolute gap between the mean
prediction and the mean target within equal-width prediction bins on [0, 1].
With binary targets this is the classic expected calibration error (ECE);
with probabilistic targets it is the soft-label variant (SMECE). Both are
computed from the same :class:`BinSummary` statistics so that they agree
bitwise whenever the targets coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "DEFAULT_NUM_BINS",
    "EvalSample",
    "BinSummary",
    "CalibrationReport",
    "ReliabilityPoint",
    "assign_bin",
    "bin_edges",
    "bin_statistics",
    "brier",
    "calibration_report",
    "ece",
    "ece_from_bins",
    "reliability_points",
    "smece",
    "smece_from_bins",
    "summarize_bins",
]

DEFAULT_NUM_BINS = 10

RELIABILITY_TARGETS = ("soft", "hard")


@dataclass(frozen=True)
class EvalSample:
    """One evaluation record.

    ``prediction`` and ``soft_label`` are probabilities in [0, 1];
    ``hard_label`` is an optional binary outcome.
    """

    prediction: float
    soft_label: float
    hard_label: int | None = None

    def __post_init__(self) -> None:
        for name in ("prediction", "soft_label"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)):
                raise ValueError(f"{name} must be a number, got {value!r}")
            if not math.isfinite(value) or not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value!r}")
        if self.hard_label is not None and self.hard_label not in (0, 1):
            raise ValueError(f"hard_label must be 0 or 1, got {self.hard_label!r}")


@dataclass(frozen=True)
class BinSummary:
    """Per-bin statistics. Empty bins keep ``count == 0`` and ``None`` means."""

    bin_index: int
    count: int
    mean_prediction: float | None
    mean_soft_label: float | None
    hard_fraction: float | None = None


@dataclass(frozen=True)
class CalibrationReport:
    """Scalar calibration scores plus the per-bin breakdown they derive from."""

    smece: float
    ece: float | None
    brier_soft: float
    brier_hard: float | None
    bins: list[BinSummary]
    n: int
    num_bins: int


class ReliabilityPoint(NamedTuple):
    mean_prediction: float
    mean_target: float
    weight: float


def bin_edges(num_bins: int) -> np.ndarray:
    """Edges of ``num_bins`` equal-width bins on [0, 1], computed as b / num_bins."""
    _check_num_bins(num_bins)
    return np.array([b / num_bins for b in range(num_bins + 1)])


def assign_bin(p: float, num_bins: int = DEFAULT_NUM_BINS) -> int:
    """1-based index of the half-open bin [(b-1)/B, b/B) containing ``p``.

    ``p == 1.0`` falls in the last bin, which is closed above so every valid
    probability has a home.
    """
    _check_num_bins(num_bins)
    if not isinstance(p, (int, float)) or not math.isfinite(p) or not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p!r}")
    if p == 1.0:
        return num_bins
    return int(np.searchsorted(bin_edges(num_bins), p, side="right"))


def bin_statistics(
    predictions: Sequence[float] | np.ndarray,
    soft_labels: Sequence[float] | np.ndarray,
    hard_labels: Sequence[float] | np.ndarray | None = None,
    num_bins: int = DEFAULT_NUM_BINS,
) -> list[BinSummary]:
    """Group samples into prediction bins and return one summary per bin.

    Exactly ``num_bins`` summaries come back in index order; empty bins carry
    ``count == 0``. ``hard_fraction`` is populated only when ``hard_labels``
    is given.
    """
    _check_num_bins(num_bins)
    preds = _as_probability_array(predictions, "predictions")
    soft = _as_probability_array(soft_labels, "soft_labels")
    if soft.shape != preds.shape:
        raise ValueError("predictions and soft_labels must have the same length")
    hard = None
    if hard_labels is not None:
        hard = np.asarray(hard_labels, dtype=float)
        if hard.shape != preds.shape:
            raise ValueError("hard_labels must have the same length as predictions")
        if not np.all((hard == 0.0) | (hard == 1.0)):
            raise ValueError("hard_labels must contain only 0 and 1")

    indices = _bin_index_array(preds, num_bins)
    summaries = []
    for b in range(num_bins):
        mask = indices == b
        count = int(np.count_nonzero(mask))
        if count == 0:
            summaries.append(BinSummary(b + 1, 0, None, None, None))
            continue
        summaries.append(
            BinSummary(
                bin_index=b + 1,
                count=count,
                mean_prediction=float(np.mean(preds[mask])),
                mean_soft_label=float(np.mean(soft[mask])),
                hard_fraction=float(np.mean(hard[mask])) if hard is not None else None,
            )
        )
    return summaries


def smece_from_bins(bins: Sequence[BinSummary]) -> float:
    """Weighted sum over bins of |mean_prediction - mean_soft_label|."""
    return _weighted_gap(bins, "mean_soft_label")


def ece_from_bins(bins: Sequence[BinSummary]) -> float:
    """Weighted sum over bins of |mean_prediction - hard_fraction|."""
    return _weighted_gap(bins, "hard_fraction")


def smece(samples: Sequence[EvalSample], num_bins: int = DEFAULT_NUM_BINS) -> float:
    """Soft-label calibration error of a sample list.

    Equals zero exactly, with no tolerance, whenever every sample predicts
    its own soft label. Reduces bitwise to :func:`ece` when every soft label
    is binary and duplicated as the hard label.
    """
    preds, soft, hard = _arrays_from_samples(samples)
    return smece_from_bins(bin_statistics(preds, soft, hard, num_bins=num_bins))


def ece(samples: Sequence[EvalSample], num_bins: int = DEFAULT_NUM_BINS) -> float:
    """Hard-label (binary outcome) calibration error of a sample list."""
    preds, soft, hard = _arrays_from_samples(samples)
    if hard is None:
        raise ValueError("ece requires a hard label on every sample")
    return ece_from_bins(bin_statistics(preds, soft, hard, num_bins=num_bins))


def brier(
    predictions: Sequence[float] | np.ndarray,
    targets: Sequence[float] | np.ndarray,
) -> float:
    """Mean squared difference between predictions and probability targets."""
    preds = _as_probability_array(predictions, "predictions")
    targ = _as_probability_array(targets, "targets")
    if targ.shape != preds.shape:
        raise ValueError("predictions and targets must have the same length")
    return float(np.mean((preds - targ) ** 2))


def summarize_bins(
    samples: Sequence[EvalSample], num_bins: int = DEFAULT_NUM_BINS
) -> list[BinSummary]:
    """Per-bin statistics of a sample list; see :func:`bin_statistics`."""
    preds, soft, hard = _arrays_from_samples(samples)
    return bin_statistics(preds, soft, hard, num_bins=num_bins)


def reliability_points(
    samples: Sequence[EvalSample],
    num_bins: int = DEFAULT_NUM_BINS,
    target: str = "soft",
) -> list[ReliabilityPoint]:
    """Reliability-diagram points: one (mean prediction, mean target, weight) per non-empty bin."""
    if target not in RELIABILITY_TARGETS:
        raise ValueError(f"target must be one of {RELIABILITY_TARGETS}, got {target!r}")
    preds, soft, hard = _arrays_from_samples(samples)
    if target == "hard" and hard is None:
        raise ValueError("hard-target reliability points require hard labels on every sample")
    bins = bin_statistics(preds, soft, hard, num_bins=num_bins)
    n = sum(b.count for b in bins)
    points = []
    for b in bins:
        if b.count == 0:
            continue
        mean_target = b.mean_soft_label if target == "soft" else b.hard_fraction
        points.append(ReliabilityPoint(b.mean_prediction, mean_target, b.count / n))
    return points


def calibration_report(
    samples: Sequence[EvalSample], num_bins: int = DEFAULT_NUM_BINS
) -> CalibrationReport:
    """Compute every supported score plus per-bin summaries in one pass.

    ECE and the hard-label Brier score are present only when every sample
    carries a hard label.
    """
    preds, soft, hard = _arrays_from_samples(samples)
    bins = bin_statistics(preds, soft, hard, num_bins=num_bins)
    return CalibrationReport(
        smece=smece_from_bins(bins),
        ece=ece_from_bins(bins) if hard is not None else None,
        brier_soft=brier(preds, soft),
        brier_hard=brier(preds, hard) if hard is not None else None,
        bins=bins,
        n=len(preds),
        num_bins=num_bins,
    )


def _check_num_bins(num_bins: int) -> None:
    if not isinstance(num_bins, (int, np.integer)) or num_bins < 1:
        raise ValueError(f"num_bins must be a positive integer, got {num_bins!r}")


def _as_probability_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if float(arr.min()) < 0.0 or float(arr.max()) > 1.0:
        raise ValueError(f"{name} must lie in [0, 1]")
    return arr


def _bin_index_array(predictions: np.ndarray, num_bins: int) -> np.ndarray:
    # searchsorted against the computed edges reproduces half-open membership
    # exactly; the top bin absorbs p == 1.0.
    idx = np.searchsorted(bin_edges(num_bins), predictions, side="right") - 1
    return np.minimum(idx, num_bins - 1)


def _weighted_gap(bins: Sequence[BinSummary], target_field: str) -> float:
    n = sum(b.count for b in bins)
    if n == 0:
        raise ValueError("no samples in any bin")
    # Plain left-to-right accumulation in bin-index order; with B ~ 10 the
    # rounding error stays far below every tolerance used downstream.
    total = 0.0
    for b in bins:
        if b.count == 0:
            continue
        target = getattr(b, target_field)
        if target is None:
            raise ValueError("hard labels are required for this metric")
        total += (b.count / n) * abs(b.mean_prediction - target)
    return total


def _arrays_from_samples(
    samples: Sequence[EvalSample],
) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    if len(samples) == 0:
        raise ValueError("at least one sample is required")
    preds = np.fromiter((s.prediction for s in samples), dtype=float, count=len(samples))
    soft = np.fromiter((s.soft_label for s in samples), dtype=float, count=len(samples))
    with_hard = sum(s.hard_label is not None for s in samples)
    if with_hard == 0:
        return preds, soft, None
    if with_hard != len(samples):
        raise ValueError(
            "hard labels must be present on every sample or on none; "
            f"got {with_hard} of {len(samples)}"
        )
    hard = np.fromiter((s.hard_label for s in samples), dtype=float, count=len(samples))
    return preds, soft, hard
