"""ADASYN oversampling of the minority (label 1) class."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from advcontract.ml.base import as_xy
from advcontract.ml.knn import nearest, pairwise_sq_dist


def round_half_up(x: np.ndarray | float) -> np.ndarray:
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5).astype(np.int64)


@dataclass
class AdasynPlan:
    G: float
    ratios: np.ndarray  # r_i per minority row
    counts: np.ndarray  # g_i per minority row
    fallback: bool


def adasyn_plan(X, y, beta: float = 1.0, k: int = 5) -> AdasynPlan:
    X, y = as_xy(X, y)
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    mino = np.nonzero(y == 1)[0]
    ms, ml = len(mino), int((y == 0).sum())
    if ms < 2:
        raise ValueError("ADASYN needs at least 2 minority samples")
    if not 1 <= k < ms:
        raise ValueError(f"k={k} must satisfy 1 <= k < minority count {ms}")
    G = max(ml - ms, 0) * beta
    D = pairwise_sq_dist(X[mino], X)
    D[np.arange(ms), mino] = np.inf  # a point is not its own neighbour
    nn = nearest(D, k)
    r = (y[nn] == 0).sum(axis=1) / k
    if G == 0:
        return AdasynPlan(0.0, r, np.zeros(ms, dtype=np.int64), False)
    if r.sum() == 0:
        return AdasynPlan(G, r, np.full(ms, round_half_up(G / ms), dtype=np.int64), True)
    return AdasynPlan(G, r, round_half_up(r / r.sum() * G), False)


def minority_neighbours(Xm: np.ndarray, k: int) -> np.ndarray:
    D = pairwise_sq_dist(Xm, Xm)
    np.fill_diagonal(D, np.inf)
    return nearest(D, min(k, len(Xm) - 1))


def adasyn(X, y, beta: float = 1.0, k: int = 5, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Returns (X', y'): the original rows unchanged, then the synthetic minority rows."""
    X, y = as_xy(X, y)
    plan = adasyn_plan(X, y, beta, k)
    if plan.counts.sum() == 0:
        return X.copy(), y.copy()
    rng = np.random.default_rng(seed)
    mino = np.nonzero(y == 1)[0]
    Xm = X[mino]
    nbrs = minority_neighbours(Xm, k)
    synth = []
    for i, g in enumerate(plan.counts):
        for _ in range(int(g)):
            z = nbrs[i, rng.integers(nbrs.shape[1])]
            lam = rng.random()
            synth.append(Xm[i] + lam * (Xm[z] - Xm[i]))
    S = np.asarray(synth)
    return np.vstack([X, S]), np.concatenate([y, np.ones(len(S), dtype=np.int64)])
