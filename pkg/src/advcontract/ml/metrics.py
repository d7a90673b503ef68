"""Confusion counts and derived classification metrics."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

DEFAULT_THRESHOLD = 0.5


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return _ratio(self.tp + self.tn, self.n)

    @property
    def precision(self) -> float:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def npv(self) -> float:
        return _ratio(self.tn, self.tn + self.fn)

    @property
    def fpr(self) -> float:
        return _ratio(self.fp, self.fp + self.tn)

    @property
    def f1(self) -> float:
        return f1_score(self.precision, self.recall)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("accuracy", "precision", "recall", "f1", "fpr"):
            d[k] = getattr(self, k)
        return d


def f1_score(precision: float, recall: float) -> float:
    s = precision + recall
    return 2 * precision * recall / s if s > 0 else 0.0


def to_labels(predictions, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    p = np.asarray(predictions, dtype=np.float64)
    return (p >= threshold).astype(np.int64)


def evaluate(predictions, labels, threshold: float = DEFAULT_THRESHOLD) -> EvalReport:
    """`predictions` are probabilities (or hard 0/1 labels); label = [p >= threshold]."""
    pred = to_labels(predictions, threshold)
    y = np.asarray(labels)
    if pred.shape != y.shape or pred.ndim != 1:
        raise ValueError(f"predictions {pred.shape} and labels {y.shape} must be equal-length vectors")
    if len(y) == 0:
        raise ValueError("cannot evaluate an empty prediction set")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    y = y.astype(np.int64)
    tp = int(((pred == 1) & (y == 1)).sum())
    fp = int(((pred == 1) & (y == 0)).sum())
    tn = int(((pred == 0) & (y == 0)).sum())
    fn = int(((pred == 0) & (y == 1)).sum())
    return EvalReport(tp, fp, tn, fn)


def f1_metric(y_true, proba) -> float:
    return evaluate(proba, y_true).f1


def accuracy_metric(y_true, proba) -> float:
    return evaluate(proba, y_true).accuracy
