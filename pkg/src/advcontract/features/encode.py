"""One-hot + z-score encoding of feature records.

Vector layout: four fund-source one-hot columns (Safe, Anonymous, Bridge,
Unknown), value_flag, verified (omitted when the verified feature is
disabled), then the z-scored numeric columns in NUMERIC_COLUMNS order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from advcontract.features.model import FeatureRecord
from advcontract.labels import CATEGORY_ORDER, FundSourceCategory

FORMAT_VERSION = 1

NUMERIC_COLUMNS = (
    "nonce",
    "input_data_length",
    "gas_used",
    "func_count",
    "public_func_count",
    "flashloan_callback_count",
    "flashloan_callback_ratio",
    "token_call_count",
    "token_call_ratio",
    "max_token_call_count",
    "avg_token_call_count",
    "delegate_call_count",
    "selfdestruct_count",
)
_DEPLOY_NUMERIC = {"nonce", "input_data_length", "gas_used"}


def numeric_row(rec: FeatureRecord) -> np.ndarray:
    d = rec.deployment
    im = rec.implementation
    return np.array(
        [float(getattr(d, c)) if c in _DEPLOY_NUMERIC else float(getattr(im, c)) for c in NUMERIC_COLUMNS],
        dtype=np.float64,
    )


def feature_names(include_verified: bool = True) -> list[str]:
    names = [f"fund_source={c.value}" for c in CATEGORY_ORDER] + ["value_flag"]
    if include_verified:
        names.append("verified")
    return names + list(NUMERIC_COLUMNS)


@dataclass(frozen=True)
class NormalizerStats:
    mean: tuple[float, ...]
    std: tuple[float, ...]
    categories: tuple[str, ...] = tuple(c.value for c in CATEGORY_ORDER)
    include_verified: bool = True
    columns: tuple[str, ...] = NUMERIC_COLUMNS

    @property
    def dim(self) -> int:
        return len(self.categories) + 1 + int(self.include_verified) + len(self.columns)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "mean": list(self.mean),
            "std": list(self.std),
            "categories": list(self.categories),
            "include_verified": self.include_verified,
            "columns": list(self.columns),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizerStats":
        if d.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported normalizer format {d.get('format_version')!r}")
        return cls(
            tuple(float(x) for x in d["mean"]),
            tuple(float(x) for x in d["std"]),
            tuple(d["categories"]),
            bool(d["include_verified"]),
            tuple(d["columns"]),
        )

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def fit_normalizer(records: list[FeatureRecord], include_verified: bool = True) -> NormalizerStats:
    if len(records) < 2:
        raise ValueError("need at least 2 records to fit a normalizer")
    m = np.stack([numeric_row(r) for r in records])
    mean = m.mean(axis=0)
    std = m.std(axis=0)  # population std
    std = np.where(std > 0, std, 1.0)
    return NormalizerStats(tuple(mean.tolist()), tuple(std.tolist()), include_verified=include_verified)


def encode(record: FeatureRecord, stats: NormalizerStats) -> np.ndarray:
    d = record.deployment
    cat = d.fund_source.value if isinstance(d.fund_source, FundSourceCategory) else str(d.fund_source)
    onehot = np.zeros(len(stats.categories))
    idx = stats.categories.index(cat) if cat in stats.categories else stats.categories.index("Unknown")
    onehot[idx] = 1.0
    flags = [float(d.value_flag)] + ([float(d.verified)] if stats.include_verified else [])
    z = (numeric_row(record) - np.asarray(stats.mean)) / np.asarray(stats.std)
    return np.concatenate([onehot, flags, z])


def encode_many(records: list[FeatureRecord], stats: NormalizerStats) -> np.ndarray:
    if not records:
        return np.zeros((0, stats.dim))
    return np.stack([encode(r, stats) for r in records])


def decode_category(vec: np.ndarray, stats: NormalizerStats) -> str:
    return stats.categories[int(np.argmax(vec[: len(stats.categories)]))]
