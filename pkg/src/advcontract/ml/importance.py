"""Permutation feature importance."""

from __future__ import annotations

from typing import Callable

import numpy as np

from advcontract.ml.metrics import f1_metric


def permutation_importance(
    model,
    X,
    y,
    metric: Callable[[np.ndarray, np.ndarray], float] = f1_metric,
    repeats: int = 5,
    seed: int = 0,
) -> np.ndarray:
    """importance[f] = mean over `repeats` of metric(base) - metric(column f shuffled)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    base = metric(y, model.predict_proba(X))
    out = np.zeros(X.shape[1])
    for f in range(X.shape[1]):
        drops = []
        for _ in range(repeats):
            Xp = X.copy()
            Xp[:, f] = Xp[rng.permutation(len(X)), f]
            drops.append(base - metric(y, model.predict_proba(Xp)))
        out[f] = float(np.mean(drops))
    return out
