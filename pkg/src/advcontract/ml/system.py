"""End-to-end training of the stacked detector, evaluation rows, bundle I/O.

Protocol on chronologically sorted records:

    pool (earliest 80%) = base_train + meta_train (latest 25% of the pool)
    base_train = base_fit + valid (latest 20% of base_train)
    test = latest 20%

Candidates train on ADASYN(base_fit) and are selected on valid. The
transformer trains on base_fit with valid for early stopping. Stacking inputs
come from the selected candidate and the transformer predicting meta_train.
All four meta kinds fit on meta_train; the served one is chosen by pooled F1
(ties: Brier score) over a contiguous 5-fold split of meta_train.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from advcontract.features.encode import NormalizerStats, encode_many, fit_normalizer
from advcontract.features.model import FeatureRecord
from advcontract.ml import weights
from advcontract.ml.adasyn import adasyn
from advcontract.ml.ensemble import (
    CANDIDATE_KINDS,
    META_KINDS,
    CandidateModel,
    MetaModel,
    Prediction,
    classifier_from_state,
    predict_contract,
    select_candidate,
    train_candidate,
    train_meta,
)
from advcontract.ml.metrics import EvalReport, evaluate
from advcontract.ml.splits import chrono_split, tail_split, window_bounds
from advcontract.ml.transformer import TransformerClassifier, TransformerConfig, train_transformer

BUNDLE_FORMAT = 1


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    include_verified: bool = True
    adasyn_beta: float = 1.0
    adasyn_k: int = 5
    valid_fraction: float = 0.2
    train_fraction: float = 0.8
    meta_fraction: float = 0.25
    meta_folds: int = 5
    transformer: TransformerConfig = TransformerConfig()

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "transformer"}
        d["transformer"] = self.transformer.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        d["transformer"] = TransformerConfig.from_dict(d["transformer"])
        return cls(**d)


@dataclass
class TrainedSystem:
    normalizer: NormalizerStats
    candidates: dict[str, CandidateModel]
    selected_candidate: str
    transformer: TransformerClassifier
    metas: dict[str, MetaModel]
    selected_meta: str
    config: TrainConfig
    info: dict = field(default_factory=dict)

    @property
    def candidate(self) -> CandidateModel:
        return self.candidates[self.selected_candidate]

    @property
    def meta(self) -> MetaModel:
        return self.metas[self.selected_meta]

    def base_probs(self, records: list[FeatureRecord]) -> np.ndarray:
        pc = self.candidate.predict_proba(encode_many(records, self.normalizer))
        pt = self.transformer.predict_proba([r.pscft for r in records])
        return np.stack([pc, pt], axis=1)

    def predict(self, record: FeatureRecord) -> Prediction:
        return predict_contract(record, self.candidate, self.transformer, self.meta, self.normalizer)

    def predict_many(self, records: list[FeatureRecord]) -> np.ndarray:
        return self.meta.predict_proba(self.base_probs(records))


def _labels(records) -> np.ndarray:
    return np.array([r.label for r in records], dtype=np.int64)


def _check_labeled(records) -> None:
    if any(r.label is None for r in records):
        raise ValueError("every training record needs a label")
    if len({r.label for r in records}) < 2:
        raise ValueError("dataset holds a single class")


def _meta_cv_reports(P: np.ndarray, y: np.ndarray, folds: int, seed: int, nd: str, vd: str):
    """Pooled out-of-fold predictions per meta kind over contiguous folds.
    Returns (reports, brier scores)."""
    out, brier = {}, {}
    bounds = window_bounds(len(y), folds)
    for kind in META_KINDS:
        preds, truth = [], []
        for a, b in bounds:
            tr = np.r_[0:a, b : len(y)]
            if len(np.unique(y[tr])) < 2 or b == a:
                continue
            m = train_meta(kind, P[tr], y[tr], seed=seed, normalizer_digest=nd, vocab_digest=vd)
            preds.append(m.predict_proba(P[a:b]))
            truth.append(y[a:b])
        if preds:
            p, t = np.concatenate(preds), np.concatenate(truth)
            out[kind], brier[kind] = evaluate(p, t), float(np.mean((p - t) ** 2))
        else:
            out[kind], brier[kind] = EvalReport(0, 0, 0, 0), 1.0
    return out, brier


def select_meta(reports: dict[str, EvalReport], brier: dict[str, float]) -> str:
    """Best pooled F1, then recall, then FPR; remaining ties go to the better
    calibrated (lower Brier) model, then to the fixed kind order."""
    def key(k):
        r = reports[k]
        return (-r.f1, -r.recall, r.fpr, round(brier[k], 12), META_KINDS.index(k))

    return min(reports, key=key)


def train_system(records: list[FeatureRecord], cfg: TrainConfig = TrainConfig()) -> TrainedSystem:
    _check_labeled(records)
    base_train, meta_train, test = chrono_split(records, cfg.train_fraction, cfg.meta_fraction)
    base_fit, valid = tail_split(base_train, cfg.valid_fraction)
    for name, part in (("base_fit", base_fit), ("valid", valid), ("meta_train", meta_train)):
        if len({r.label for r in part}) < 2:
            raise ValueError(f"{name} slice holds a single class; dataset too small or too skewed")
    diagnostics = []
    stats = fit_normalizer(base_fit, cfg.include_verified)
    nd = stats.digest()
    X, y = encode_many(base_fit, stats), _labels(base_fit)
    if int(y.sum()) > cfg.adasyn_k:
        Xa, ya = adasyn(X, y, cfg.adasyn_beta, cfg.adasyn_k, cfg.seed)
    else:
        Xa, ya = X, y
        diagnostics.append("ADASYN skipped: too few minority samples for k neighbours")
    candidates = [train_candidate(k, Xa, ya, seed=cfg.seed, normalizer_digest=nd) for k in CANDIDATE_KINDS]
    Xv, yv = encode_many(valid, stats), _labels(valid)
    chosen, cand_reports = select_candidate(candidates, Xv, yv)

    tcfg = replace(cfg.transformer, seed=cfg.seed)
    transformer = train_transformer([r.pscft for r in base_fit], y, [r.pscft for r in valid], yv, tcfg)
    vd = transformer.vocab.digest()

    ym = _labels(meta_train)
    Pm = np.stack(
        [chosen.predict_proba(encode_many(meta_train, stats)), transformer.predict_proba([r.pscft for r in meta_train])],
        axis=1,
    )
    metas = {k: train_meta(k, Pm, ym, seed=cfg.seed, normalizer_digest=nd, vocab_digest=vd) for k in META_KINDS}
    meta_reports, meta_brier = _meta_cv_reports(Pm, ym, cfg.meta_folds, cfg.seed, nd, vd)
    selected_meta = select_meta(meta_reports, meta_brier)

    info = {
        "sizes": {"base_fit": len(base_fit), "valid": len(valid), "meta_train": len(meta_train), "test": len(test)},
        "test_from_timestamp": min(r.deploy_timestamp for r in test),
        "candidate_valid": {k: v.to_dict() for k, v in cand_reports.items()},
        "meta_cv": {k: {**v.to_dict(), "brier": meta_brier[k]} for k, v in meta_reports.items()},
        "transformer_epochs": len(transformer.history),
        "diagnostics": diagnostics,
    }
    return TrainedSystem(stats, {m.kind: m for m in candidates}, chosen.kind, transformer, metas, selected_meta, cfg, info)


def eval_rows(system: TrainedSystem, records: list[FeatureRecord]) -> list[tuple[str, EvalReport]]:
    """Nine rows: every candidate, the transformer, every meta (stacked on the selected candidate)."""
    y = _labels(records)
    X = encode_many(records, system.normalizer)
    rows = [(f"candidate:{k}", evaluate(system.candidates[k].predict_proba(X), y)) for k in CANDIDATE_KINDS]
    pt = system.transformer.predict_proba([r.pscft for r in records])
    rows.append(("transformer", evaluate(pt, y)))
    P = np.stack([system.candidate.predict_proba(X), pt], axis=1)
    rows += [(f"meta:{k}", evaluate(system.metas[k].predict_proba(P), y)) for k in META_KINDS]
    return rows


def holdout_slice(records: list[FeatureRecord], cfg: TrainConfig) -> list[FeatureRecord]:
    return chrono_split(records, cfg.train_fraction, cfg.meta_fraction)[2]


# bundle I/O


def _model_entry(name: str, role: str, kind: str, config: dict, arrays: dict, root: Path) -> dict:
    blob = weights.dumps(arrays)
    rel = f"weights/{name}.acwt"
    (root / rel).write_bytes(blob)
    return {"name": name, "role": role, "kind": kind, "config": config, "weights": rel,
            "sha256": hashlib.sha256(blob).hexdigest()}


def save_bundle(system: TrainedSystem, path: str | Path) -> Path:
    root = Path(path)
    (root / "weights").mkdir(parents=True, exist_ok=True)
    models = []
    for k, m in system.candidates.items():
        c, a = m.model.get_state()
        models.append(_model_entry(f"candidate_{k}", "candidate", k, c, a, root))
    c, a = system.transformer.get_state()
    models.append(_model_entry("transformer", "transformer", "TRANSFORMER", c, a, root))
    for k, m in system.metas.items():
        c, a = m.model.get_state()
        models.append(_model_entry(f"meta_{k}", "meta", k, c, a, root))
    manifest = {
        "format_version": BUNDLE_FORMAT,
        "weights_format": f"ACWT/{weights.VERSION}",
        "vocab_hash": system.transformer.vocab.digest(),
        "normalizer_hash": system.normalizer.digest(),
        "normalizer": system.normalizer.to_dict(),
        "selected_candidate": system.selected_candidate,
        "selected_meta": system.selected_meta,
        "train_config": system.config.to_dict(),
        "info": system.info,
        "models": models,
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return root


def load_bundle(path: str | Path) -> TrainedSystem:
    root = Path(path)
    mf = root / "manifest.json"
    if not mf.is_file():
        raise FileNotFoundError(f"no manifest.json in bundle {root}")
    manifest = json.loads(mf.read_text())
    if manifest.get("format_version") != BUNDLE_FORMAT:
        raise ValueError(f"unsupported bundle format {manifest.get('format_version')!r}")
    stats = NormalizerStats.from_dict(manifest["normalizer"])
    if stats.digest() != manifest["normalizer_hash"]:
        raise ValueError("normalizer hash mismatch")
    candidates, metas, transformer = {}, {}, None
    for e in manifest["models"]:
        blob = (root / e["weights"]).read_bytes()
        if hashlib.sha256(blob).hexdigest() != e["sha256"]:
            raise ValueError(f"weight file {e['weights']} does not match its manifest hash")
        arrays = weights.loads(blob)
        if e["role"] == "transformer":
            transformer = TransformerClassifier.from_state(e["config"], arrays)
        elif e["role"] == "candidate":
            candidates[e["kind"]] = CandidateModel(e["kind"], classifier_from_state(e["kind"], e["config"], arrays),
                                                   manifest["normalizer_hash"])
        else:
            metas[e["kind"]] = MetaModel(e["kind"], classifier_from_state(e["kind"], e["config"], arrays),
                                         manifest["normalizer_hash"], manifest["vocab_hash"])
    if transformer is None or transformer.vocab.digest() != manifest["vocab_hash"]:
        raise ValueError("vocabulary hash mismatch")
    return TrainedSystem(stats, candidates, manifest["selected_candidate"], transformer, metas,
                         manifest["selected_meta"], TrainConfig.from_dict(manifest["train_config"]), manifest["info"])


def bundle_hash(path: str | Path) -> str:
    root = Path(path)
    h = hashlib.sha256()
    for p in sorted(q for q in root.rglob("*") if q.is_file()):
        h.update(p.relative_to(root).as_posix().encode() + b"\0")
        h.update(p.read_bytes())
    return h.hexdigest()
