"""Deterministic experiment runners and replication statistics.

Each replication is a pure function of a derived 64-bit seed, so results are
independent of execution order and of the number of worker processes. All
aggregation happens in fixed index order after the per-replication scores
are collected.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Sequence

import numpy as np

from .generative import HARD_MODES, GenerativeConfig, make_dataset
from .metrics import bin_statistics, ece_from_bins, smece_from_bins
from .models import MODEL_LETTERS, ModelSpec, default_models, predict

__all__ = [
    "DEFAULT_MASTER_SEED",
    "K_SWEEP",
    "N_SWEEP",
    "MODEL_PAIRS",
    "ExperimentConfig",
    "Experiment1Result",
    "Experiment2Result",
    "Experiment3Result",
    "Experiment4Result",
    "MetricCell",
    "ModelMetricsRow",
    "RankingResult",
    "derive_replication_seed",
    "ground_truth_order",
    "pairwise_accuracy",
    "run_experiment",
    "run_experiment1",
    "run_experiment2",
    "run_experiment3",
    "run_experiment4",
]

DEFAULT_MASTER_SEED = 424242

K_SWEEP = (0.5, 1.0, 2.0, 5.0, 10.0, 50.0)
N_SWEEP = (500, 1000, 2000, 5000, 10000)

METRIC_NAMES = ("smece", "ece")

MODEL_PAIRS = tuple(combinations(MODEL_LETTERS, 2))

_MASK64 = (1 << 64) - 1
_INDEX_BITS = 20


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved parameters of one experiment run."""

    experiment_id: int
    k_values: tuple[float, ...]
    n_values: tuple[int, ...]
    replications: int
    num_bins: int = 10
    master_seed: int = DEFAULT_MASTER_SEED
    hard_mode: str = "threshold"

    def __post_init__(self) -> None:
        object.__setattr__(self, "k_values", tuple(self.k_values))
        object.__setattr__(self, "n_values", tuple(self.n_values))
        if self.experiment_id not in (1, 2, 3, 4):
            raise ValueError(f"experiment_id must be 1..4, got {self.experiment_id!r}")
        if not self.k_values or any(
            not (isinstance(k, (int, float)) and math.isfinite(k) and k > 0)
            for k in self.k_values
        ):
            raise ValueError("k_values must be a non-empty list of positive scalars")
        if not self.n_values or any(
            not isinstance(n, (int, np.integer)) or n < 1 for n in self.n_values
        ):
            raise ValueError("n_values must be a non-empty list of positive integers")
        if not isinstance(self.replications, (int, np.integer)) or self.replications < 1:
            raise ValueError(f"replications must be a positive integer, got {self.replications!r}")
        if not isinstance(self.num_bins, (int, np.integer)) or self.num_bins < 1:
            raise ValueError(f"num_bins must be a positive integer, got {self.num_bins!r}")
        if not isinstance(self.master_seed, (int, np.integer)):
            raise ValueError(f"master_seed must be an integer, got {self.master_seed!r}")
        if self.hard_mode not in HARD_MODES:
            raise ValueError(f"hard_mode must be one of {HARD_MODES}, got {self.hard_mode!r}")

    @classmethod
    def defaults(
        cls,
        experiment_id: int,
        *,
        master_seed: int | None = None,
        k_values: Sequence[float] | None = None,
        n_values: Sequence[int] | None = None,
        replications: int | None = None,
        num_bins: int | None = None,
        hard_mode: str | None = None,
    ) -> "ExperimentConfig":
        """The stock configuration of an experiment, with optional overrides."""
        if experiment_id == 1:
            base = cls(1, k_values=(2.0,), n_values=(5000,), replications=1)
        elif experiment_id == 2:
            base = cls(2, k_values=K_SWEEP, n_values=(5000,), replications=1)
        elif experiment_id == 3:
            base = cls(3, k_values=K_SWEEP, n_values=(1000,), replications=1000)
        elif experiment_id == 4:
            base = cls(4, k_values=(2.0,), n_values=N_SWEEP, replications=500)
        else:
            raise ValueError(f"experiment_id must be 1..4, got {experiment_id!r}")
        overrides = {
            name: value
            for name, value in (
                ("master_seed", master_seed),
                ("k_values", tuple(k_values) if k_values is not None else None),
                ("n_values", tuple(n_values) if n_values is not None else None),
                ("replications", replications),
                ("num_bins", num_bins),
                ("hard_mode", hard_mode),
            )
            if value is not None
        }
        return replace(base, **overrides) if overrides else base

    def as_dict(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "k_values": list(self.k_values),
            "n_values": list(self.n_values),
            "replications": self.replications,
            "num_bins": self.num_bins,
            "master_seed": self.master_seed,
            "hard_mode": self.hard_mode,
        }


@dataclass(frozen=True)
class MetricCell:
    """One mean +/- std cell of a replication table."""

    model: str
    metric: str
    mean: float
    std: float
    rank: int | None = None


@dataclass(frozen=True)
class RankingResult:
    """Pairwise ranking accuracies of one metric at one steepness."""

    per_pair: dict[tuple[str, str], float]
    overall: float
    k: float


@dataclass(frozen=True)
class ModelMetricsRow:
    model: str
    smece: float
    ece: float
    smece_rank: int
    ece_rank: int


@dataclass(frozen=True)
class Experiment1Result:
    config: ExperimentConfig
    rows: list[ModelMetricsRow]


@dataclass(frozen=True)
class Experiment2Result:
    config: ExperimentConfig
    k_values: tuple[float, ...]
    smece: dict[str, list[float]]
    ece: dict[str, list[float]]


@dataclass(frozen=True)
class Experiment3Result:
    config: ExperimentConfig
    k_values: tuple[float, ...]
    smece: list[RankingResult]
    ece: list[RankingResult]


@dataclass(frozen=True)
class Experiment4Result:
    config: ExperimentConfig
    n_values: tuple[int, ...]
    cells: dict[str, dict[str, list[MetricCell]]] = field(repr=False)
    """Nested metric -> model letter -> one cell per sample size."""


def _avalanche64(value: int) -> int:
    # splitmix64 finalizer: a bijection on 64-bit integers with full avalanche.
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_replication_seed(
    master_seed: int, k_index: int, n_index: int, replication_index: int
) -> int:
    """Stable 64-bit seed for one replication of one experiment condition.

    The indices are packed into disjoint 20-bit fields and passed through a
    64-bit avalanche mix, so for a fixed master seed the mapping is injective
    over the whole index space and identical under any degree of parallelism.
    """
    for name, index in (
        ("k_index", k_index),
        ("n_index", n_index),
        ("replication_index", replication_index),
    ):
        if not isinstance(index, (int, np.integer)) or not 0 <= index < (1 << _INDEX_BITS):
            raise ValueError(f"{name} must be an integer in [0, 2^{_INDEX_BITS}), got {index!r}")
    packed = (int(k_index) << (2 * _INDEX_BITS)) | (int(n_index) << _INDEX_BITS) | int(
        replication_index
    )
    return _avalanche64((int(master_seed) & _MASK64) ^ _avalanche64(packed))


def ground_truth_order() -> dict[str, int]:
    """Quality levels of the model zoo: lower is better, equal means tied."""
    return {"A": 0, "B": 1, "C": 1, "D": 2, "E": 3}


def pairwise_accuracy(
    scores_per_replication: Sequence[dict[str, float]], k: float = float("nan")
) -> RankingResult:
    """Fraction of replications ranking each model pair correctly.

    For strict pairs the truth-better model must score strictly lower; exact
    score ties count as incorrect. The tied pair scores 1.0 regardless of the
    observed order. ``overall`` is the mean over all pairs.
    """
    if len(scores_per_replication) == 0:
        raise ValueError("at least one replication is required")
    for scores in scores_per_replication:
        missing = [m for m in MODEL_LETTERS if m not in scores]
        if missing:
            raise ValueError(f"replication is missing scores for models: {missing}")
    levels = ground_truth_order()
    per_pair: dict[tuple[str, str], float] = {}
    for a, b in MODEL_PAIRS:
        if levels[a] == levels[b]:
            per_pair[(a, b)] = 1.0
            continue
        better, worse = (a, b) if levels[a] < levels[b] else (b, a)
        correct = sum(s[better] < s[worse] for s in scores_per_replication)
        per_pair[(a, b)] = correct / len(scores_per_replication)
    overall = sum(per_pair[pair] for pair in MODEL_PAIRS) / len(MODEL_PAIRS)
    return RankingResult(per_pair=per_pair, overall=overall, k=k)


def _replication_scores(task) -> tuple[tuple[float, float], ...]:
    """Both metrics for all five models on one freshly seeded dataset.

    Returns ``((smece, ece), ...)`` in model letter order. Must stay a pure
    function of the task tuple: it runs in worker processes.
    """
    seed, k, n, num_bins, hard_mode, models = task
    rng = np.random.default_rng(seed)
    dataset = make_dataset(GenerativeConfig(k=k, n=n), hard_mode, rng)
    hard = dataset.hard_labels.astype(float)
    scores = []
    for spec in models:
        preds = predict(spec, dataset.inputs, k, rng=rng)
        bins = bin_statistics(preds, dataset.soft_labels, hard, num_bins=num_bins)
        scores.append((smece_from_bins(bins), ece_from_bins(bins)))
    return tuple(scores)


def _map_tasks(tasks, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [_replication_scores(t) for t in tasks]
    chunksize = max(1, len(tasks) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_replication_scores, tasks, chunksize=chunksize))


def _condition_scores(
    config: ExperimentConfig,
    k: float,
    n: int,
    k_index: int,
    n_index: int,
    models: tuple[ModelSpec, ...],
    workers: int,
) -> np.ndarray:
    """Score array of shape (replications, models, metrics) for one condition."""
    tasks = [
        (
            derive_replication_seed(config.master_seed, k_index, n_index, r),
            k,
            n,
            config.num_bins,
            config.hard_mode,
            models,
        )
        for r in range(config.replications)
    ]
    return np.array(_map_tasks(tasks, workers), dtype=float)


def _dense_ranks(scores: dict[str, float]) -> dict[str, int]:
    # Ascending score; exact ties broken by model letter.
    order = sorted(scores, key=lambda m: (scores[m], m))
    return {model: position + 1 for position, model in enumerate(order)}


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


def run_experiment1(config: ExperimentConfig, workers: int = 1) -> Experiment1Result:
    """Both metrics and dense ranks for all models on one seeded dataset."""
    _require(config.experiment_id == 1, "config is not for experiment 1")
    _require(len(config.k_values) == 1, "experiment 1 uses a single k")
    _require(len(config.n_values) == 1, "experiment 1 uses a single n")
    _require(config.replications == 1, "experiment 1 uses a single replication")
    scores = _condition_scores(
        config, config.k_values[0], config.n_values[0], 0, 0, default_models(), workers
    )[0]
    smece_scores = {m: float(scores[i, 0]) for i, m in enumerate(MODEL_LETTERS)}
    ece_scores = {m: float(scores[i, 1]) for i, m in enumerate(MODEL_LETTERS)}
    smece_ranks = _dense_ranks(smece_scores)
    ece_ranks = _dense_ranks(ece_scores)
    rows = [
        ModelMetricsRow(m, smece_scores[m], ece_scores[m], smece_ranks[m], ece_ranks[m])
        for m in MODEL_LETTERS
    ]
    return Experiment1Result(config=config, rows=rows)


def run_experiment2(config: ExperimentConfig, workers: int = 1) -> Experiment2Result:
    """Both metrics for every model across the steepness sweep, one dataset per k."""
    _require(config.experiment_id == 2, "config is not for experiment 2")
    _require(len(config.n_values) == 1, "experiment 2 uses a single n")
    _require(config.replications == 1, "experiment 2 uses a single replication per k")
    n = config.n_values[0]
    models = default_models()
    smece_values: dict[str, list[float]] = {m: [] for m in MODEL_LETTERS}
    ece_values: dict[str, list[float]] = {m: [] for m in MODEL_LETTERS}
    for k_index, k in enumerate(config.k_values):
        scores = _condition_scores(config, k, n, k_index, 0, models, workers)[0]
        for i, m in enumerate(MODEL_LETTERS):
            smece_values[m].append(float(scores[i, 0]))
            ece_values[m].append(float(scores[i, 1]))
    return Experiment2Result(
        config=config, k_values=config.k_values, smece=smece_values, ece=ece_values
    )


def run_experiment3(config: ExperimentConfig, workers: int = 1) -> Experiment3Result:
    """Pairwise ranking accuracy per steepness over replicated datasets."""
    _require(config.experiment_id == 3, "config is not for experiment 3")
    _require(len(config.n_values) == 1, "experiment 3 uses a single n")
    n = config.n_values[0]
    models = default_models()
    smece_results = []
    ece_results = []
    for k_index, k in enumerate(config.k_values):
        scores = _condition_scores(config, k, n, k_index, 0, models, workers)
        for metric_index, bucket in ((0, smece_results), (1, ece_results)):
            per_rep = [
                {m: float(scores[r, i, metric_index]) for i, m in enumerate(MODEL_LETTERS)}
                for r in range(scores.shape[0])
            ]
            bucket.append(pairwise_accuracy(per_rep, k=k))
    return Experiment3Result(
        config=config, k_values=config.k_values, smece=smece_results, ece=ece_results
    )


def run_experiment4(config: ExperimentConfig, workers: int = 1) -> Experiment4Result:
    """Replication mean and sample std of both metrics across sample sizes."""
    _require(config.experiment_id == 4, "config is not for experiment 4")
    _require(len(config.k_values) == 1, "experiment 4 uses a single k")
    k = config.k_values[0]
    models = default_models()
    cells: dict[str, dict[str, list[MetricCell]]] = {
        metric: {m: [] for m in MODEL_LETTERS} for metric in METRIC_NAMES
    }
    for n_index, n in enumerate(config.n_values):
        scores = _condition_scores(config, k, n, 0, n_index, models, workers)
        for metric_index, metric in enumerate(METRIC_NAMES):
            for i, m in enumerate(MODEL_LETTERS):
                series = scores[:, i, metric_index]
                std = float(np.std(series, ddof=1)) if len(series) > 1 else 0.0
                cells[metric][m].append(
                    MetricCell(model=m, metric=metric, mean=float(np.mean(series)), std=std)
                )
    return Experiment4Result(config=config, n_values=config.n_values, cells=cells)


def run_experiment(config: ExperimentConfig, workers: int = 1):
    """Dispatch to the runner matching ``config.experiment_id``."""
    runners = {
        1: run_experiment1,
        2: run_experiment2,
        3: run_experiment3,
        4: run_experiment4,
    }
    return runners[config.experiment_id](config, workers=workers)
