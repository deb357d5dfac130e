"""File formats: result tables, dataset CSV files, reports, and run manifests.

Data files (datasets, reliability points) serialise floats in shortest
round-trip form so they re-parse bitwise. Report tables use fixed 4-decimal
cells. All emitted CSV follows RFC 4180 with LF line endings so repeated runs
are byte-identical.
"""

from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .experiments import (
    Experiment1Result,
    Experiment2Result,
    Experiment3Result,
    Experiment4Result,
    ExperimentConfig,
    MODEL_PAIRS,
)
from .generative import LabeledDataset
from .metrics import CalibrationReport, EvalSample, ReliabilityPoint

__all__ = [
    "DATASET_COLUMNS",
    "REDUCED_COLUMNS",
    "DataFormatError",
    "MeanStd",
    "OutputTable",
    "RunManifest",
    "experiment_tables",
    "read_eval_samples",
    "render_reliability_csv",
    "report_json_payload",
    "report_summary_table",
    "write_dataset_csv",
]

MODEL_COLUMN_ORDER = ("A", "B", "C", "D", "E")
DATASET_COLUMNS = ("x", "p_star", "y_hard") + tuple(
    f"p_hat_{m}" for m in MODEL_COLUMN_ORDER
)
REDUCED_COLUMNS = ("prediction", "soft_label", "hard_label")


class DataFormatError(ValueError):
    """A data file violates the expected schema; messages name line and column."""


class MeanStd(NamedTuple):
    """A replication-table cell rendered as ``mean +/- std``."""

    mean: float
    std: float


@dataclass
class OutputTable:
    """One emittable result table with a fixed column layout."""

    title: str
    column_names: list[str]
    rows: list[list]
    format: str = "csv"

    def __post_init__(self) -> None:
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be 'csv' or 'json', got {self.format!r}")
        for row in self.rows:
            if len(row) != len(self.column_names):
                raise ValueError(
                    f"row has {len(row)} cells, expected {len(self.column_names)}"
                )

    def render(self) -> str:
        if self.format == "json":
            payload = {
                "title": self.title,
                "columns": list(self.column_names),
                "rows": [[_json_cell(cell) for cell in row] for row in self.rows],
            }
            return json.dumps(payload, indent=2) + "\n"
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.column_names)
        for row in self.rows:
            writer.writerow([_csv_cell(cell) for cell in row])
        return buf.getvalue()

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.render(), encoding="utf-8")
        return path


def _csv_cell(cell) -> str:
    if isinstance(cell, MeanStd):
        return f"{cell.mean:.4f} ± {cell.std:.4f}"
    if isinstance(cell, bool):
        return str(cell)
    if isinstance(cell, (int, np.integer)):
        return str(int(cell))
    if isinstance(cell, (float, np.floating)):
        return f"{cell:.4f}"
    if cell is None:
        return ""
    return str(cell)


def _json_cell(cell):
    if isinstance(cell, MeanStd):
        return {"mean": round(cell.mean, 4), "std": round(cell.std, 4)}
    if isinstance(cell, (int, np.integer)) and not isinstance(cell, bool):
        return int(cell)
    if isinstance(cell, (float, np.floating)):
        return round(float(cell), 4)
    return cell


@dataclass
class RunManifest:
    """Everything needed to regenerate a set of output files byte-for-byte."""

    master_seed: int
    tool_version: str
    config: dict
    outputs: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "master_seed": self.master_seed,
            "tool_version": self.tool_version,
            "config": self.config,
            "outputs": self.outputs,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_json(), encoding="utf-8")
        return path

    @classmethod
    def read(cls, path: str | Path) -> "RunManifest":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
            return cls(
                master_seed=payload["master_seed"],
                tool_version=payload["tool_version"],
                config=payload["config"],
                outputs=payload["outputs"],
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataFormatError(f"not a valid run manifest: {path}: {exc}") from exc

    def experiment_config(self) -> ExperimentConfig:
        cfg = self.config
        try:
            return ExperimentConfig(
                experiment_id=cfg["experiment_id"],
                k_values=tuple(cfg["k_values"]),
                n_values=tuple(cfg["n_values"]),
                replications=cfg["replications"],
                num_bins=cfg["num_bins"],
                master_seed=cfg["master_seed"],
                hard_mode=cfg["hard_mode"],
            )
        except KeyError as exc:
            raise DataFormatError(f"manifest config is missing field {exc}") from exc


def write_dataset_csv(
    path: str | Path,
    dataset: LabeledDataset,
    predictions: dict[str, np.ndarray],
) -> Path:
    """Write a simulated dataset with one prediction column per model letter."""
    missing = [m for m in MODEL_COLUMN_ORDER if m not in predictions]
    if missing:
        raise ValueError(f"missing prediction columns for models: {missing}")
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(DATASET_COLUMNS)
        for i in range(dataset.n):
            row = [
                repr(float(dataset.inputs[i])),
                repr(float(dataset.soft_labels[i])),
                str(int(dataset.hard_labels[i])),
            ]
            row.extend(repr(float(predictions[m][i])) for m in MODEL_COLUMN_ORDER)
            writer.writerow(row)
    return path


def read_eval_samples(path: str | Path, model: str | None = None) -> list[EvalSample]:
    """Parse evaluation samples from a reduced or full dataset CSV.

    The reduced schema is ``prediction,soft_label[,hard_label]``. A full
    dataset file (as written by ``write_dataset_csv``) additionally requires
    ``model`` to pick the prediction column; its soft labels come from
    ``p_star`` and its hard labels from ``y_hard``.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file, expected a header row") from None
        rows = list(reader)

    header = [h.strip() for h in header]
    if tuple(header) == DATASET_COLUMNS:
        if model is None:
            raise ValueError(
                "a full dataset file needs a model letter to select the prediction column"
            )
        if model not in MODEL_COLUMN_ORDER:
            raise ValueError(f"model must be one of {MODEL_COLUMN_ORDER}, got {model!r}")
        pred_col = header.index(f"p_hat_{model}")
        soft_col = header.index("p_star")
        hard_col = header.index("y_hard")
        hard_optional = False
    elif tuple(header) == REDUCED_COLUMNS or tuple(header) == REDUCED_COLUMNS[:2]:
        pred_col, soft_col = 0, 1
        hard_col = 2 if len(header) == 3 else None
        hard_optional = True
    else:
        raise DataFormatError(
            f"{path}: unrecognised header {header!r}; expected "
            f"{list(REDUCED_COLUMNS[:2])}[,'hard_label'] or {list(DATASET_COLUMNS)}"
        )

    samples = []
    for offset, row in enumerate(rows):
        lineno = offset + 2  # header is line 1
        if len(row) != len(header):
            raise DataFormatError(
                f"{path}: line {lineno}: expected {len(header)} columns, got {len(row)}"
            )
        prediction = _parse_probability(row[pred_col], path, lineno, header[pred_col])
        soft_label = _parse_probability(row[soft_col], path, lineno, header[soft_col])
        hard_label = None
        if hard_col is not None:
            raw = row[hard_col].strip()
            if raw == "" and hard_optional:
                hard_label = None
            elif raw in ("0", "1"):
                hard_label = int(raw)
            else:
                raise DataFormatError(
                    f"{path}: line {lineno}: column '{header[hard_col]}': "
                    f"expected 0 or 1, got {raw!r}"
                )
        samples.append(EvalSample(prediction, soft_label, hard_label))
    if not samples:
        raise DataFormatError(f"{path}: no data rows")
    return samples


def _parse_probability(raw: str, path: Path, lineno: int, column: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise DataFormatError(
            f"{path}: line {lineno}: column '{column}': not a number: {raw!r}"
        ) from None
    if not np.isfinite(value) or not 0.0 <= value <= 1.0:
        raise DataFormatError(
            f"{path}: line {lineno}: column '{column}': probability out of range: {value}"
        )
    return value


def render_reliability_csv(points: Sequence[ReliabilityPoint]) -> str:
    """Plot-ready point rows with shortest round-trip float serialisation."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["mean_prediction", "mean_target", "weight"])
    for point in points:
        writer.writerow(
            [repr(point.mean_prediction), repr(point.mean_target), repr(point.weight)]
        )
    return buf.getvalue()


def report_summary_table(report: CalibrationReport, fmt: str = "csv") -> OutputTable:
    """One-row scalar summary of a calibration report."""
    return OutputTable(
        title="Calibration summary",
        column_names=["smece", "ece", "brier_soft", "brier_hard", "n", "num_bins"],
        rows=[
            [
                report.smece,
                report.ece,
                report.brier_soft,
                report.brier_hard,
                report.n,
                report.num_bins,
            ]
        ],
        format=fmt,
    )


def report_json_payload(report: CalibrationReport) -> dict:
    """Full-precision report document, including the per-bin breakdown."""
    return {
        "smece": report.smece,
        "ece": report.ece,
        "brier_soft": report.brier_soft,
        "brier_hard": report.brier_hard,
        "n": report.n,
        "num_bins": report.num_bins,
        "bins": [
            {
                "bin_index": b.bin_index,
                "count": b.count,
                "mean_prediction": b.mean_prediction,
                "mean_soft_label": b.mean_soft_label,
                "hard_fraction": b.hard_fraction,
            }
            for b in report.bins
        ],
    }


def experiment_tables(result, fmt: str = "csv") -> list[tuple[str, OutputTable]]:
    """The output tables of an experiment result, as (name, table) pairs.

    Table numbering is part of the stable output contract: experiment 1
    emits table2; experiment 2 emits table3 and table4; experiment 3 emits
    table5 and table6; experiment 4 emits table7 and table8.
    """
    if isinstance(result, Experiment1Result):
        return [("table2", _experiment1_table(result, fmt))]
    if isinstance(result, Experiment2Result):
        return [
            ("table3", _sweep_table(result, "smece", fmt)),
            ("table4", _sweep_table(result, "ece", fmt)),
        ]
    if isinstance(result, Experiment3Result):
        return [
            ("table5", _ranking_overall_table(result, fmt)),
            ("table6", _ranking_pairs_table(result, fmt)),
        ]
    if isinstance(result, Experiment4Result):
        return [
            ("table7", _replication_table(result, "smece", fmt)),
            ("table8", _replication_table(result, "ece", fmt)),
        ]
    raise ValueError(f"unknown experiment result type: {type(result)!r}")


def _experiment1_table(result: Experiment1Result, fmt: str) -> OutputTable:
    cfg = result.config
    return OutputTable(
        title=(
            f"Per-model SMECE and ECE with dense ranks "
            f"(k={cfg.k_values[0]:g}, n={cfg.n_values[0]}, bins={cfg.num_bins})"
        ),
        column_names=["model", "smece", "ece", "smece_rank", "ece_rank"],
        rows=[[r.model, r.smece, r.ece, r.smece_rank, r.ece_rank] for r in result.rows],
        format=fmt,
    )


def _sweep_table(result: Experiment2Result, metric: str, fmt: str) -> OutputTable:
    cfg = result.config
    values = getattr(result, metric)
    return OutputTable(
        title=(
            f"{metric.upper()} per model across steepness "
            f"(n={cfg.n_values[0]}, bins={cfg.num_bins})"
        ),
        column_names=["model"] + [f"k={k:g}" for k in result.k_values],
        rows=[[m] + list(values[m]) for m in MODEL_COLUMN_ORDER],
        format=fmt,
    )


def _ranking_overall_table(result: Experiment3Result, fmt: str) -> OutputTable:
    cfg = result.config
    return OutputTable(
        title=(
            f"Overall pairwise ranking accuracy "
            f"(n={cfg.n_values[0]}, replications={cfg.replications})"
        ),
        column_names=["metric"] + [f"k={k:g}" for k in result.k_values],
        rows=[
            ["smece"] + [r.overall for r in result.smece],
            ["ece"] + [r.overall for r in result.ece],
        ],
        format=fmt,
    )


def _ranking_pairs_table(result: Experiment3Result, fmt: str) -> OutputTable:
    cfg = result.config
    rows = []
    for i, k in enumerate(result.k_values):
        for pair in MODEL_PAIRS:
            rows.append(
                [
                    f"{k:g}",
                    f"{pair[0]} vs {pair[1]}",
                    result.smece[i].per_pair[pair],
                    result.ece[i].per_pair[pair],
                ]
            )
    return OutputTable(
        title=(
            f"Per-pair ranking accuracy "
            f"(n={cfg.n_values[0]}, replications={cfg.replications})"
        ),
        column_names=["k", "pair", "smece", "ece"],
        rows=rows,
        format=fmt,
    )


def _replication_table(result: Experiment4Result, metric: str, fmt: str) -> OutputTable:
    cfg = result.config
    rows = []
    for m in MODEL_COLUMN_ORDER:
        cells = result.cells[metric][m]
        rows.append([m] + [MeanStd(c.mean, c.std) for c in cells])
    return OutputTable(
        title=(
            f"{metric.upper()} replication mean ± std per sample size "
            f"(k={cfg.k_values[0]:g}, replications={cfg.replications})"
        ),
        column_names=["model"] + [f"n={n}" for n in result.n_values],
        rows=rows,
        format=fmt,
    )
