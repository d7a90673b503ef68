"""Shared plumbing for the numpy learners."""

from __future__ import annotations

import numpy as np

from advcontract.ml.metrics import DEFAULT_THRESHOLD


def as_xy(X, y=None) -> tuple[np.ndarray, np.ndarray | None]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D feature matrix, got shape {X.shape}")
    if y is None:
        return X, None
    y = np.asarray(y)
    if y.shape != (len(X),):
        raise ValueError(f"labels shape {y.shape} does not match {len(X)} rows")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    return X, y.astype(np.int64)


def require_two_classes(y: np.ndarray) -> None:
    if len(np.unique(y)) < 2:
        raise ValueError("training data holds a single class")


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


class Classifier:
    """Binary classifier interface: fit, predict_proba, state round-trip."""

    kind = "?"

    def predict_proba(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(np.int64)

    def get_state(self) -> tuple[dict, dict[str, np.ndarray]]:
        """(json-able config, named arrays)."""
        raise NotImplementedError

    @classmethod
    def from_state(cls, config: dict, arrays: dict[str, np.ndarray]):
        raise NotImplementedError
