"""k-nearest-neighbour classifier (Euclidean, majority vote)."""

from __future__ import annotations

import numpy as np

from advcontract.ml.base import Classifier, as_xy, require_two_classes


def pairwise_sq_dist(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=2)


def nearest(D: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k smallest entries per row; ties go to the lower column index."""
    return np.argsort(D, axis=1, kind="stable")[:, :k]


class KNN(Classifier):
    """proba = positive share of the k neighbours. A split vote (even k) goes to
    the class with the smaller summed neighbour distance; the proba is then
    nudged just above or below 0.5 so that label = [proba >= 0.5] still holds."""

    kind = "KNN"

    def __init__(self, k: int = 5):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self.X = np.zeros((0, 0))
        self.y = np.zeros(0, dtype=np.int64)

    def fit(self, X, y) -> "KNN":
        X, y = as_xy(X, y)
        require_two_classes(y)
        self.X, self.y = X.copy(), y.copy()
        return self

    def predict_proba(self, X) -> np.ndarray:
        X, _ = as_xy(X)
        k = min(self.k, len(self.y))
        D = pairwise_sq_dist(X, self.X)
        nn = nearest(D, k)
        votes = self.y[nn]
        proba = votes.mean(axis=1)
        tie = proba == 0.5
        if tie.any():
            dist = np.sqrt(np.take_along_axis(D, nn, axis=1))
            d_pos = np.where(votes == 1, dist, 0.0).sum(axis=1)
            d_neg = np.where(votes == 0, dist, 0.0).sum(axis=1)
            below = np.nextafter(0.5, 0.0)
            proba = np.where(tie & (d_pos > d_neg), below, proba)
        return proba

    def get_state(self):
        return {"k": self.k}, {"X": self.X, "y": self.y}

    @classmethod
    def from_state(cls, config, arrays):
        m = cls(config["k"])
        m.X, m.y = arrays["X"].astype(np.float64), arrays["y"].astype(np.int64)
        return m
