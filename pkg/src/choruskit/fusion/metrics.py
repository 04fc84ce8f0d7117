"""Line-level binary metrics, top-K selection, and prediction files."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DataError, RowError


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float


def evaluate(predicted: Sequence[bool], actual: Sequence[bool]) -> Metrics:
    """Standard binary metrics with chorus as the positive class.

    Zero denominators give 0 for precision/recall, and F1 is 0 when both
    vanish.
    """
    pred = np.asarray(predicted, dtype=bool)
    true = np.asarray(actual, dtype=bool)
    if pred.shape != true.shape:
        raise DataError(
            f"{pred.shape[0]} predictions for {true.shape[0]} labels"
        )
    if pred.size == 0:
        raise DataError("nothing to evaluate")
    tp = int(np.sum(pred & true))
    fp = int(np.sum(pred & ~true))
    fn = int(np.sum(~pred & true))
    tn = int(np.sum(~pred & ~true))
    acc = (tp + tn) / pred.size
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Metrics(accuracy=acc, precision=precision, recall=recall, f1=f1)


def select_top_k(scores: Sequence[float], k: int) -> np.ndarray:
    """Boolean labels with exactly k positives; ties go to earlier lines."""
    scores = np.asarray(scores, dtype=np.float64)
    if k > scores.size:
        raise DataError(f"k={k} exceeds {scores.size} lines")
    out = np.zeros(scores.size, dtype=bool)
    if k > 0:
        order = np.argsort(-scores, kind="stable")
        out[order[:k]] = True
    return out


@dataclass(frozen=True)
class Prediction:
    song_id: str
    line_index: int
    probability: float
    label: bool

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0 or not np.isfinite(self.probability):
            raise DataError(
                f"probability {self.probability} outside [0, 1] for "
                f"{self.song_id}:{self.line_index}"
            )


def predictions_to_tsv(predictions: Sequence[Prediction]) -> str:
    rows = [
        f"{p.song_id}\t{p.line_index}\t{p.probability:.9g}\t{1 if p.label else 0}"
        for p in predictions
    ]
    return "\n".join(rows) + ("\n" if rows else "")


def parse_predictions_tsv(text: str) -> list[Prediction]:
    out = []
    for row_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        fields = raw.rstrip("\r").split("\t")
        if len(fields) != 4:
            raise RowError(row_no, f"expected 4 fields, got {len(fields)}")
        try:
            out.append(Prediction(
                song_id=fields[0],
                line_index=int(fields[1]),
                probability=float(fields[2]),
                label=fields[3] == "1",
            ))
        except (ValueError, DataError) as exc:
            raise RowError(row_no, str(exc)) from None
    return out


def metrics_to_tsv(metrics: Metrics) -> str:
    return (
        f"{metrics.accuracy:.6f}\t{metrics.precision:.6f}"
        f"\t{metrics.recall:.6f}\t{metrics.f1:.6f}\n"
    )


def format_metrics_table(named: dict[str, Metrics]) -> str:
    width = max(len(n) for n in named) if named else 5
    lines = [f"{'model':<{width}}  acc     P       R       F1"]
    for name, m in named.items():
        lines.append(
            f"{name:<{width}}  {m.accuracy:<6.4f}  {m.precision:<6.4f}"
            f"  {m.recall:<6.4f}  {m.f1:<6.4f}"
        )
    return "\n".join(lines)
