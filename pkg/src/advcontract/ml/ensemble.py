"""Candidate feature classifiers, candidate selection and the stacking meta model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from advcontract.features.encode import NormalizerStats, encode
from advcontract.features.model import FeatureRecord
from advcontract.ml.base import Classifier, as_xy, require_two_classes
from advcontract.ml.knn import KNN
from advcontract.ml.linear import LinearSVM, LogisticRegression
from advcontract.ml.metrics import DEFAULT_THRESHOLD, EvalReport, evaluate
from advcontract.ml.transformer import TransformerClassifier
from advcontract.ml.tree import DecisionTree, GradientBoostedTrees, RandomForest

CANDIDATE_KINDS = ("LR", "DT", "RF", "GBT")
META_KINDS = ("KNN", "LR", "SVM", "DT")

CANDIDATE_DEFAULTS: dict[str, dict] = {
    "LR": {"l2": 1e-3, "lr": 0.5, "epochs": 2000},
    "DT": {"max_depth": 6, "min_samples_leaf": 2},
    "RF": {"n_trees": 50, "max_depth": 8, "min_samples_leaf": 1},
    "GBT": {"n_rounds": 100, "learning_rate": 0.1, "max_depth": 3},
}
META_DEFAULTS: dict[str, dict] = {
    "KNN": {"k": 5},
    "LR": {"l2": 1e-3, "lr": 1.0, "epochs": 3000},
    "SVM": {"lam": 1e-3, "epochs": 2000},
    "DT": {"max_depth": 3, "min_samples_leaf": 2},
}

_CLASSES: dict[str, type[Classifier]] = {
    "LR": LogisticRegression,
    "DT": DecisionTree,
    "RF": RandomForest,
    "GBT": GradientBoostedTrees,
    "KNN": KNN,
    "SVM": LinearSVM,
}
_SEEDED = {"DT", "RF", "GBT"}


def make_classifier(kind: str, hyperparams: dict | None = None, seed: int = 0) -> Classifier:
    if kind not in _CLASSES:
        raise ValueError(f"unknown model kind {kind!r}")
    hp = dict(hyperparams or {})
    if kind in _SEEDED:
        hp.setdefault("seed", seed)
    return _CLASSES[kind](**hp)


def classifier_from_state(kind: str, config: dict, arrays: dict) -> Classifier:
    return _CLASSES[kind].from_state(config, arrays)


@dataclass
class CandidateModel:
    kind: str
    model: Classifier
    normalizer_digest: str = ""

    def predict_proba(self, X) -> np.ndarray:
        return np.clip(self.model.predict_proba(X), 0.0, 1.0)

    def predict(self, X, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(np.int64)


def train_candidate(kind: str, X, y, hyperparams: dict | None = None, seed: int = 0,
                    normalizer_digest: str = "") -> CandidateModel:
    if kind not in CANDIDATE_KINDS:
        raise ValueError(f"{kind!r} is not a candidate kind {CANDIDATE_KINDS}")
    X, y = as_xy(X, y)
    require_two_classes(y)
    hp = {**CANDIDATE_DEFAULTS[kind], **(hyperparams or {})}
    return CandidateModel(kind, make_classifier(kind, hp, seed).fit(X, y), normalizer_digest)


def selection_key(report: EvalReport, kind: str, order=CANDIDATE_KINDS) -> tuple:
    """Sort key: higher F1, then higher recall, then lower FPR, then fixed kind order."""
    return (-report.f1, -report.recall, report.fpr, order.index(kind))


def rank_reports(reports: dict[str, EvalReport], order=CANDIDATE_KINDS) -> list[str]:
    return sorted(reports, key=lambda k: selection_key(reports[k], k, order))


def select_candidate(models: list[CandidateModel], X_val, y_val) -> tuple[CandidateModel, dict[str, EvalReport]]:
    reports = {m.kind: evaluate(m.predict_proba(X_val), y_val) for m in models}
    best = rank_reports(reports)[0]
    return next(m for m in models if m.kind == best), reports


def check_meta_input(P) -> np.ndarray:
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.shape[1] != 2:
        raise ValueError(f"meta input must be (n, 2) base probabilities, got shape {P.shape}")
    if ((P < 0) | (P > 1)).any() or np.isnan(P).any():
        raise ValueError("meta input probabilities must lie in [0, 1]")
    return P


@dataclass
class MetaModel:
    kind: str
    model: Classifier
    normalizer_digest: str = ""
    vocab_digest: str = ""

    def predict_proba(self, P) -> np.ndarray:
        return np.clip(self.model.predict_proba(check_meta_input(P)), 0.0, 1.0)

    def predict(self, P, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
        return (self.predict_proba(P) >= threshold).astype(np.int64)


def train_meta(kind: str, base_probs, labels, hyperparams: dict | None = None, seed: int = 0,
               normalizer_digest: str = "", vocab_digest: str = "") -> MetaModel:
    if kind not in META_KINDS:
        raise ValueError(f"{kind!r} is not a meta kind {META_KINDS}")
    P = check_meta_input(base_probs)
    _, y = as_xy(P, labels)
    require_two_classes(y)
    hp = {**META_DEFAULTS[kind], **(hyperparams or {})}
    return MetaModel(kind, make_classifier(kind, hp, seed).fit(P, y), normalizer_digest, vocab_digest)


@dataclass(frozen=True)
class Prediction:
    label_pred: int
    p_pred: float
    p_classifier: float
    p_transformer: float
    extras: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"label_pred": self.label_pred, "p_pred": self.p_pred,
                "p_classifier": self.p_classifier, "p_transformer": self.p_transformer}


def predict_contract(record: FeatureRecord, candidate: CandidateModel, transformer: TransformerClassifier,
                     meta: MetaModel, normalizer: NormalizerStats) -> Prediction:
    nd, vd = normalizer.digest(), transformer.vocab.digest()
    if candidate.normalizer_digest and candidate.normalizer_digest != nd:
        raise ValueError("normalizer does not match the one the candidate model was trained with")
    if meta.normalizer_digest and meta.normalizer_digest != nd:
        raise ValueError("normalizer does not match the one the meta model was trained with")
    if meta.vocab_digest and meta.vocab_digest != vd:
        raise ValueError("vocabulary does not match the one the meta model was trained with")
    pc = float(candidate.predict_proba(encode(record, normalizer)[None, :])[0])
    pt = float(transformer.predict_proba([record.pscft])[0])
    p = float(meta.predict_proba([[pc, pt]])[0])
    return Prediction(int(p >= DEFAULT_THRESHOLD), p, pc, pt)
