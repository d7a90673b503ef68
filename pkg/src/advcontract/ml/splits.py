"""Chronological splits and expanding-window cross-validation.

Records are duck-typed: anything with `deploy_timestamp`, `contract_id` and
`label` attributes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from advcontract.ml.metrics import EvalReport, evaluate


def chrono_key(rec) -> tuple:
    return (rec.deploy_timestamp, rec.contract_id)


def chrono_sort(records: Sequence) -> list:
    return sorted(records, key=chrono_key)


def chrono_split(records: Sequence, train_fraction: float = 0.8, meta_fraction: float = 0.25) -> tuple[list, list, list]:
    """(base_train, meta_train, test). Pool = earliest floor(train_fraction·n);
    meta_train = latest floor(meta_fraction·|pool|) of the pool."""
    if len(records) < 5:
        raise ValueError(f"need at least 5 records for a chronological split, got {len(records)}")
    if not 0 < train_fraction < 1 or not 0 <= meta_fraction < 1:
        raise ValueError("fractions out of range")
    rs = chrono_sort(records)
    n_pool = math.floor(train_fraction * len(rs))
    n_meta = math.floor(meta_fraction * n_pool)
    pool, test = rs[:n_pool], rs[n_pool:]
    return pool[: n_pool - n_meta], pool[n_pool - n_meta :], test


def tail_split(records: Sequence, fraction: float) -> tuple[list, list]:
    """Chronological (head, tail) with |tail| = floor(fraction·n)."""
    rs = chrono_sort(records)
    n_tail = math.floor(fraction * len(rs))
    return rs[: len(rs) - n_tail], rs[len(rs) - n_tail :]


@dataclass
class Fold:
    train_size: int
    test_size: int
    train_max_time: int
    test_min_time: int
    report: EvalReport | None


@dataclass
class CVResult:
    folds: list[Fold]
    diagnostics: list[str] = field(default_factory=list)

    @property
    def reports(self) -> list[EvalReport]:
        return [f.report for f in self.folds if f.report is not None]

    @property
    def mean_f1(self) -> float:
        rs = self.reports
        return float(np.mean([r.f1 for r in rs])) if rs else 0.0


def window_bounds(n: int, n_splits: int) -> list[tuple[int, int]]:
    """(start, end) of each of n_splits near-equal contiguous chunks."""
    edges = np.cumsum([0] + [len(c) for c in np.array_split(np.arange(n), n_splits)])
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def expanding_window_cv(
    records: Sequence,
    trainer: Callable[[list], Callable[[list], np.ndarray]],
    n_splits: int = 5,
) -> CVResult:
    """Fold i trains on chunks 1..i and tests on chunk i+1. `trainer(train)` returns
    a predictor mapping records to probabilities."""
    if n_splits < 2:
        raise ValueError("n_splits must be >= 2")
    rs = chrono_sort(records)
    if len(rs) < n_splits:
        raise ValueError(f"{len(rs)} records cannot fill {n_splits} splits")
    bounds = window_bounds(len(rs), n_splits)
    res = CVResult([])
    for i in range(1, n_splits):
        train, test = rs[: bounds[i - 1][1]], rs[bounds[i][0] : bounds[i][1]]
        fold = Fold(len(train), len(test), max(r.deploy_timestamp for r in train),
                    min(r.deploy_timestamp for r in test), None)
        if len({r.label for r in train}) < 2:
            res.diagnostics.append(f"fold {i}: single class in training window, skipped")
        else:
            predict = trainer(train)
            fold.report = evaluate(predict(test), [r.label for r in test])
        res.folds.append(fold)
    return res
