"""Test-time prediction: majority vote, weighted average and final predictor."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

from .core import Dataset, PredictorSnapshot, SparseVector, TrainingRun, dot

MODES = ("vote", "average", "final")


def predict_linear(w: SparseVector, x: SparseVector) -> int:
    return 1 if dot(w, x) >= 0.0 else -1


def vote_predict(snapshots: Sequence[PredictorSnapshot], x: SparseVector) -> int:
    """Survival-weighted majority vote; ties go to +1."""
    if not snapshots:
        raise ValueError("vote needs at least one snapshot")
    total = 0
    for snap in snapshots:
        total += snap.c * predict_linear(snap.w, x)
    return 1 if total >= 0 else -1


def averaged_weights(snapshots: Sequence[PredictorSnapshot]) -> SparseVector:
    if not snapshots:
        raise ValueError("average needs at least one snapshot")
    dim = snapshots[0].w.dim
    acc: dict[int, float] = {}
    for snap in snapshots:
        if snap.w.dim != dim:
            raise ValueError("snapshots disagree on dimension")
        for j, v in snap.w.entries.items():
            acc[j] = acc.get(j, 0.0) + snap.c * v
    n = len(snapshots)
    return SparseVector({j: v / n for j, v in acc.items()}, dim)


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    fscore: float
    mistakes: int
    n: int

    def to_dict(self) -> dict:
        return asdict(self)


def metrics_from_predictions(y_true: Sequence[int], y_pred: Sequence[int]) -> Metrics:
    if len(y_true) == 0:
        raise ValueError("cannot compute metrics on an empty test set")
    tp = fp = fn = correct = 0
    for y, p in zip(y_true, y_pred):
        correct += y == p
        if p == 1 and y == 1:
            tp += 1
        elif p == 1:
            fp += 1
        elif y == 1:
            fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    n = len(y_true)
    return Metrics(correct / n, precision, recall, f, n - correct, n)


def predictions(mode: str, run: TrainingRun, test: Dataset) -> list[int]:
    if mode == "vote":
        if not run.has_snapshots:
            raise ValueError(
                f"vote mode needs every snapshot; run was kept with retention={run.retention!r}"
            )
        return [vote_predict(run.snapshots, ex.x) for ex in test]
    if mode == "average":
        w = averaged_weights(run.snapshots) if run.has_snapshots else run.averaged()
    elif mode == "final":
        w = run.final
    else:
        raise ValueError(f"unknown prediction mode {mode!r}")
    return [predict_linear(w, ex.x) for ex in test]


def evaluate(mode: str, run: TrainingRun, test: Dataset) -> Metrics:
    """Accuracy plus precision/recall/F of the +1 class on ``test``."""
    if len(test) == 0:
        raise ValueError("cannot evaluate on an empty test set")
    preds = predictions(mode, run, test)
    return metrics_from_predictions([ex.y for ex in test], preds)


def agreement_rate(run: TrainingRun, test: Dataset) -> float:
    """Fraction of test points where the vote and the weighted average agree."""
    if len(test) == 0:
        raise ValueError("cannot compare predictors on an empty test set")
    a = predictions("vote", run, test)
    b = predictions("average", run, test)
    return sum(p == q for p, q in zip(a, b)) / len(test)
