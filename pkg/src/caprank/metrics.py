"""Leaderboard metric suite: ranking, calibration, and regression scores.

Tie conventions are pinned so results are exactly reproducible: ROC-AUC
gives tied score pairs half credit, average precision breaks score ties by
stable input order, and Spearman assigns average ranks to ties before the
Pearson step.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .fusion.pairs import per_molecule_error, sigmoid
from .fusion.standardize import EmptyInput, as_float_vector
from .fusion.svm import SingleClassInput
from .store import BINARY_CLASSIFICATION, IoFailure

CLASSIFICATION_METRICS = ("roc_auc", "average_precision", "bce_loss", "avg_error")
REGRESSION_METRICS = ("mse", "mae", "r2", "pearson_r", "spearman_r", "avg_error")


class NoPositives(ValueError):
    pass


class ZeroVariance(ValueError):
    pass


def _paired(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = as_float_vector(scores)
    y = as_float_vector(labels)
    if s.shape[0] != y.shape[0]:
        raise ValueError(f"{s.shape[0]} scores but {y.shape[0]} labels")
    if s.shape[0] == 0:
        raise EmptyInput("empty metric input")
    return s, y


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with tied values sharing the mean of their rank block."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    i = 0
    while i < values.shape[0]:
        j = i
        while j + 1 < values.shape[0] and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def roc_auc(scores, labels) -> float:
    """Probability a random positive outscores a random negative; ties 0.5."""
    s, y = _paired(scores, labels)
    pos = y > 0.5
    n_pos = int(pos.sum())
    n_neg = s.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassInput("ROC-AUC needs both classes")
    ranks = _average_ranks(s)
    # Mann-Whitney: rank sums are exact half-integers, so the tie credit
    # carries through without rounding.
    u = ranks[pos].sum() - 0.5 * n_pos * (n_pos + 1)
    return u / (n_pos * n_neg)


def average_precision(scores, labels) -> float:
    s, y = _paired(scores, labels)
    n_pos = int((y > 0.5).sum())
    if n_pos == 0:
        raise NoPositives("average precision needs at least one positive")
    order = np.argsort(-s, kind="stable")  # ties keep input order
    hits = 0
    total = 0.0
    for rank, idx in enumerate(order, start=1):
        if y[idx] > 0.5:
            hits += 1
            total += hits / rank
    return total / n_pos


def bce_loss(scores, labels) -> float:
    """Mean binary cross-entropy of sigmoid(score), clipped to [1e-7, 1-1e-7]."""
    s, y = _paired(scores, labels)
    total = 0.0
    for k in range(s.shape[0]):
        p = min(max(sigmoid(float(s[k])), 1e-7), 1.0 - 1e-7)
        total += -(y[k] * math.log(p) + (1.0 - y[k]) * math.log(1.0 - p))
    return total / s.shape[0]


def mse(preds, labels) -> float:
    p, y = _paired(preds, labels)
    return float(np.mean((p - y) ** 2))


def mae(preds, labels) -> float:
    p, y = _paired(preds, labels)
    return float(np.mean(np.abs(p - y)))


def r2(preds, labels) -> float:
    p, y = _paired(preds, labels)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise ZeroVariance("labels have zero variance")
    ss_res = float(np.sum((p - y) ** 2))
    return 1.0 - ss_res / ss_tot


def pearson_r(x, y) -> float:
    a, b = _paired(x, y)
    if a.shape[0] < 2:
        raise ValueError("correlation needs at least two points")
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(da @ da)) * math.sqrt(float(db @ db))
    if denom == 0.0:
        raise ZeroVariance("correlation input has zero variance")
    return float(da @ db) / denom


def spearman_r(x, y) -> float:
    a, b = _paired(x, y)
    if a.shape[0] < 2:
        raise ValueError("correlation needs at least two points")
    return pearson_r(_average_ranks(a), _average_ranks(b))


def avg_error(task: str, scores, labels) -> float:
    s, y = _paired(scores, labels)
    return float(
        np.mean([per_molecule_error(task, float(s[k]), float(y[k])) for k in range(s.shape[0])])
    )


_METRIC_FUNCS = {
    "roc_auc": roc_auc,
    "average_precision": average_precision,
    "bce_loss": bce_loss,
    "mse": mse,
    "mae": mae,
    "r2": r2,
    "pearson_r": pearson_r,
    "spearman_r": spearman_r,
}


def compute_metric_report(task: str, scores, labels) -> dict[str, float]:
    """All metrics for one (dataset, fold, captioner) cell.

    Metrics undefined on the given data (single-class fold, zero label
    variance, no positives) are omitted rather than raised, so one degenerate
    fold cannot sink a whole run.
    """
    names = (
        CLASSIFICATION_METRICS if task == BINARY_CLASSIFICATION else REGRESSION_METRICS
    )
    out: dict[str, float] = {}
    for name in names:
        try:
            if name == "avg_error":
                out[name] = float(avg_error(task, scores, labels))
            else:
                out[name] = float(_METRIC_FUNCS[name](scores, labels))
        except (SingleClassInput, NoPositives, ZeroVariance):
            continue
    return out


@dataclass(frozen=True, slots=True)
class MetricRow:
    dataset: str
    fold: int
    captioner: str
    values: dict[str, float]


def write_metrics_csv(rows: list[MetricRow], path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["dataset", "fold", "captioner", "metric", "value"])
            for row in rows:
                for metric in sorted(row.values):
                    writer.writerow(
                        [row.dataset, row.fold, row.captioner, metric, repr(float(row.values[metric]))]
                    )
    except OSError as exc:
        raise IoFailure(f"cannot write metrics file {path}: {exc}") from exc


def read_metrics_csv(path) -> list[MetricRow]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["dataset", "fold", "captioner", "metric", "value"]:
                raise ValueError(f"bad metrics header in {path}: {header!r}")
            cells: dict[tuple[str, int, str], dict[str, float]] = {}
            for parts in reader:
                if len(parts) != 5:
                    raise ValueError(f"bad metrics row in {path}: {parts!r}")
                key = (parts[0], int(parts[1]), parts[2])
                cells.setdefault(key, {})[parts[3]] = float(parts[4])
    except OSError as exc:
        raise IoFailure(f"cannot read metrics file {path}: {exc}") from exc
    return [
        MetricRow(dataset, fold, captioner, values)
        for (dataset, fold, captioner), values in cells.items()
    ]
