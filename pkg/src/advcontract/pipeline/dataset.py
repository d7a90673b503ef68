"""Dataset files and dataset construction.

A dataset file is line-delimited JSON. The first line is a header naming the
format and the feature layout; every further line is one FeatureRecord::

    {"format": "advcontract.dataset", "version": 1, "deployment": [...],
     "implementation": [...], "encoded_columns": [...], "count": N}
    {"contract_id": "0x..", "deploy_timestamp": .., "label": 0|1, ...}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from advcontract.chain.benign import classify_benign_candidates
from advcontract.chain.monitor import DeploymentEvent
from advcontract.features.encode import feature_names
from advcontract.features.model import DeploymentFeatures, FeatureRecord, ImplementationFeatures
from advcontract.labels import normalize_address
from advcontract.pipeline.core import AnalysisContext, analyze_event

DATASET_FORMAT = "advcontract.dataset"
DATASET_VERSION = 1


def dataset_header(n: int) -> dict:
    return {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "deployment": list(DeploymentFeatures.__dataclass_fields__),
        "implementation": list(ImplementationFeatures.__dataclass_fields__),
        "encoded_columns": feature_names(True),
        "count": n,
    }


def write_dataset(records: list[FeatureRecord], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [json.dumps(dataset_header(len(records)), sort_keys=True)]
    lines += [json.dumps(r.to_dict(), sort_keys=True) for r in records]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_dataset(path: str | Path) -> list[FeatureRecord]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty dataset file")
    head = json.loads(lines[0])
    if head.get("format") != DATASET_FORMAT:
        raise ValueError(f"{path}: not a dataset file (header {head.get('format')!r})")
    if head.get("version") != DATASET_VERSION:
        raise ValueError(f"{path}: unsupported dataset version {head.get('version')!r}")
    records = [FeatureRecord.from_dict(json.loads(ln)) for ln in lines[1:]]
    if head.get("count") not in (None, len(records)):
        raise ValueError(f"{path}: header says {head['count']} records, file holds {len(records)}")
    return records


def read_label_file(path: str | Path) -> set[str]:
    """Adversarial contract addresses, one per line; `#` comments. A CSV line
    keeps its first field, so `address,note` files work too."""
    out = set()
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.add(normalize_address(line.split(",", 1)[0].strip()))
    return out


def write_events(events: Iterable[DeploymentEvent], path: str | Path) -> Path:
    path = Path(path)
    path.write_text("".join(json.dumps(e.to_dict(), sort_keys=True) + "\n" for e in events))
    return path


def read_events(path: str | Path) -> list[DeploymentEvent]:
    return [DeploymentEvent.from_dict(json.loads(ln)) for ln in Path(path).read_text().splitlines() if ln.strip()]


@dataclass
class BuildResult:
    records: list[FeatureRecord]
    dropped: dict[str, str] = field(default_factory=dict)  # address -> reason
    failed: dict[str, str] = field(default_factory=dict)  # address -> error


def build_dataset(
    events: list[DeploymentEvent],
    ctx: AnalysisContext,
    adversarial: set[str],
    min_unique_callers: int = 10,
    window: tuple[int, int] | None = None,
) -> BuildResult:
    """Adversarial contracts come from the operator label file and are kept
    as-is. Every other deployment is a benign candidate: kept only with enough
    distinct callers and when it is neither a token nor a proxy."""
    known = {e.contract_address for e in events}
    missing = sorted(adversarial - known)
    if missing:
        raise ValueError(f"label file names {len(missing)} contract(s) absent from the events, e.g. {missing[0]}")
    if ctx.explorer is None:
        raise ValueError("dataset building needs an explorer for caller histories")
    res = BuildResult([])
    benign_events = [e for e in events if e.contract_address not in adversarial]
    keep = set(adversarial)
    for d in classify_benign_candidates(benign_events, ctx.explorer, min_unique_callers, window):
        if d.kept:
            keep.add(d.address)
        else:
            res.dropped[d.address] = d.reason
    for ev in sorted(events, key=lambda e: e.order_key):
        if ev.contract_address not in keep:
            continue
        label = int(ev.contract_address in adversarial)
        rep = analyze_event(ev, ctx, label=label)
        if rep.ok:
            res.records.append(rep.record)
        else:
            res.failed[ev.contract_address] = rep.error
    return res
