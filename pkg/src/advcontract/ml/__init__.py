from advcontract.ml.adasyn import adasyn, adasyn_plan
from advcontract.ml.ensemble import (
    CANDIDATE_KINDS,
    META_KINDS,
    CandidateModel,
    MetaModel,
    Prediction,
    predict_contract,
    rank_reports,
    select_candidate,
    train_candidate,
    train_meta,
)
from advcontract.ml.importance import permutation_importance
from advcontract.ml.metrics import EvalReport, evaluate, f1_score
from advcontract.ml.splits import CVResult, chrono_split, expanding_window_cv
from advcontract.ml.system import (
    TrainConfig,
    TrainedSystem,
    bundle_hash,
    eval_rows,
    holdout_slice,
    load_bundle,
    save_bundle,
    train_system,
)
from advcontract.ml.transformer import TransformerClassifier, TransformerConfig, train_transformer
from advcontract.ml.vocab import CLS, PAD, UNK, TokenVocabulary, build_vocab

__all__ = [
    "CANDIDATE_KINDS",
    "CLS",
    "CVResult",
    "CandidateModel",
    "EvalReport",
    "META_KINDS",
    "MetaModel",
    "PAD",
    "Prediction",
    "TokenVocabulary",
    "TrainConfig",
    "TrainedSystem",
    "TransformerClassifier",
    "TransformerConfig",
    "UNK",
    "adasyn",
    "adasyn_plan",
    "build_vocab",
    "bundle_hash",
    "chrono_split",
    "eval_rows",
    "holdout_slice",
    "evaluate",
    "expanding_window_cv",
    "f1_score",
    "load_bundle",
    "permutation_importance",
    "predict_contract",
    "rank_reports",
    "save_bundle",
    "select_candidate",
    "train_candidate",
    "train_meta",
    "train_system",
    "train_transformer",
]
