"""Command implementations behind the CLI and the HTTP service."""

from __future__ import annotations

import json
import logging
import shutil
import sys
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

import numpy as np

from advcontract.chain.monitor import StreamError, watch_blocks
from advcontract.chain.snapshot import ReplayMissError
from advcontract.features.encode import encode_many, feature_names
from advcontract.ml.importance import permutation_importance
from advcontract.ml.metrics import EvalReport
from advcontract.ml.splits import expanding_window_cv
from advcontract.ml.system import (
    TrainConfig,
    TrainedSystem,
    eval_rows,
    holdout_slice,
    load_bundle,
    save_bundle,
    train_system,
)
from advcontract.pipeline.core import (
    AnalysisContext,
    AnalysisReport,
    analyze_address,
    analyze_code,
    analyze_event,
    failed_report,
    parse_code,
)
from advcontract.pipeline.dataset import BuildResult, build_dataset, read_dataset, write_dataset

log = logging.getLogger(__name__)


def is_address(target: str) -> bool:
    t = target.lower()
    return t.startswith("0x") and len(t) == 42 and all(c in "0123456789abcdef" for c in t[2:])


def cmd_analyze(target: str, ctx: AnalysisContext, deployment: dict | None = None) -> AnalysisReport:
    """`target` is a contract address or a path to a hex/raw bytecode file."""
    if is_address(target) and not Path(target).exists():
        return analyze_address(target, ctx)
    path = Path(target)
    try:
        code = parse_code(path.read_bytes())
    except (OSError, ValueError) as exc:
        return failed_report(str(path), f"{type(exc).__name__}: {exc}")
    return analyze_code(code, ctx, deployment)


# monitor


@dataclass
class MonitorSummary:
    analyzed: int = 0
    alerts: int = 0
    errors: int = 0
    gaps: list[str] = field(default_factory=list)
    reports: list[AnalysisReport] = field(default_factory=list)


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def cmd_monitor(
    ctx: AnalysisContext,
    from_block: int | None,
    to_block: int | None = None,
    alert_log: str | Path | None = None,
    timings_log: str | Path | None = None,
    workers: int = 1,
    follow: bool = False,
    out: TextIO | None = None,
    keep_reports: bool = False,
) -> MonitorSummary:
    """Analyze every deployment in the block range. Workers analyze
    concurrently; results are consumed in (block, tx_index) order, so the
    alert log order is fixed regardless of which analysis finishes first."""
    if ctx.system is None:
        raise ValueError("monitor needs a model bundle")
    if ctx.rpc is None:
        raise ValueError("monitor needs an RPC endpoint or a snapshot")
    out = out or sys.stdout
    summary = MonitorSummary()
    if to_block is None and not follow:
        try:
            to_block = ctx.rpc.block_number()
        except ReplayMissError:
            out.write("snapshot holds no chain head; nothing to replay\n")
            return summary
    if from_block is None:
        from_block = to_block if to_block is not None else ctx.rpc.block_number()
    alerts = open(alert_log, "a") if alert_log else None
    timings = open(timings_log, "a") if timings_log else None
    pending: deque = deque()

    def drain(report: AnalysisReport) -> None:
        summary.analyzed += 1
        if keep_reports:
            summary.reports.append(report)
        if not report.ok:
            summary.errors += 1
            out.write(f"error block={report.order_key[0]} tx={report.order_key[1]} {report.contract_id}: {report.error}\n")
        if timings:
            row = {"contract_id": report.contract_id, "block_number": report.order_key[0],
                   "tx_index": report.order_key[1], "wall_s": report.wall_s, **report.timings,
                   "label_pred": report.prediction.label_pred if report.prediction else None}
            timings.write(_dump(row) + "\n")
        if report.adversarial:
            summary.alerts += 1
            a = report.alert()
            if alerts:
                alerts.write(_dump(a) + "\n")
                alerts.flush()
            out.write(f"ALERT block={a['block_number']} tx={a['tx_index']} contract={a['contract_id']} "
                      f"p_pred={a['p_pred']:.4f}\n")

    try:
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            for item in watch_blocks(ctx.rpc, from_block, to_block, follow=follow):
                if isinstance(item, StreamError):
                    msg = f"block {item.block_number} unavailable: {item.message}"
                    summary.gaps.append(msg)
                    out.write(f"gap {msg}\n")
                    continue
                pending.append(pool.submit(analyze_event, item, ctx))
                while len(pending) > 2 * max(1, workers):
                    drain(pending.popleft().result())
            while pending:
                drain(pending.popleft().result())
    finally:
        for f in (alerts, timings):
            if f:
                f.close()
    return summary


# dataset / train / eval


def cmd_dataset_build(
    events: list,
    ctx: AnalysisContext,
    adversarial: set[str],
    out_path: str | Path,
    min_unique_callers: int = 10,
) -> BuildResult:
    res = build_dataset(events, ctx, adversarial, min_unique_callers)
    write_dataset(res.records, out_path)
    return res


def _prepare_bundle_dir(path: Path) -> None:
    """Reuse a directory only if it is empty or already holds a bundle."""
    if not path.exists():
        return
    entries = list(path.iterdir())
    if not entries:
        return
    if not (path / "manifest.json").is_file():
        raise FileExistsError(f"{path} exists and is not a model bundle; refusing to overwrite")
    (path / "manifest.json").unlink()
    if (path / "weights").is_dir():
        shutil.rmtree(path / "weights")


def cmd_train(dataset: str | Path, out_dir: str | Path, seed: int = 0, include_verified: bool = True,
              cfg: TrainConfig | None = None) -> TrainedSystem:
    records = read_dataset(dataset)
    cfg = cfg or TrainConfig(seed=seed, include_verified=include_verified)
    system = train_system(records, cfg)
    out = Path(out_dir)
    _prepare_bundle_dir(out)
    save_bundle(system, out)
    return system


ROW_HEADER = ("model", "accuracy", "precision", "recall", "f1", "fpr", "tp", "fp", "tn", "fn")


def format_rows(rows: list[tuple[str, EvalReport]]) -> str:
    lines = [f"{'model':<16}{'accuracy':>10}{'precision':>11}{'recall':>9}{'f1':>9}{'fpr':>9}"
             f"{'tp':>6}{'fp':>6}{'tn':>6}{'fn':>6}"]
    for name, r in rows:
        lines.append(f"{name:<16}{r.accuracy:>10.4f}{r.precision:>11.4f}{r.recall:>9.4f}{r.f1:>9.4f}{r.fpr:>9.4f}"
                     f"{r.tp:>6}{r.fp:>6}{r.tn:>6}{r.fn:>6}")
    return "\n".join(lines)


def cmd_eval(dataset: str | Path, bundle: str | Path, all_records: bool = False) -> list[tuple[str, EvalReport]]:
    """Nine rows on the chronological test slice (or every record)."""
    system = load_bundle(bundle)
    records = read_dataset(dataset)
    part = records if all_records else holdout_slice(records, system.config)
    return eval_rows(system, part)


def cmd_eval_cv(dataset: str | Path, cfg: TrainConfig, n_splits: int = 5):
    records = read_dataset(dataset)

    def trainer(train):
        system = train_system(train, cfg)
        return system.predict_many

    return expanding_window_cv(records, trainer, n_splits)


class _StackedTabular:
    """The served system seen as a function of the encoded tabular columns,
    with transformer probabilities held fixed per row."""

    def __init__(self, system: TrainedSystem, p_transformer: np.ndarray):
        self.system, self.pt = system, p_transformer

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        pc = self.system.candidate.predict_proba(X)
        return self.system.meta.predict_proba(np.stack([pc, self.pt], axis=1))


def cmd_eval_importance(dataset: str | Path, bundle: str | Path, repeats: int = 5, seed: int = 0,
                        all_records: bool = False) -> list[tuple[str, float]]:
    system = load_bundle(bundle)
    records = read_dataset(dataset)
    part = records if all_records else holdout_slice(records, system.config)
    X = encode_many(part, system.normalizer)
    y = np.array([r.label for r in part])
    pt = system.transformer.predict_proba([r.pscft for r in part])
    imp = permutation_importance(_StackedTabular(system, pt), X, y, repeats=repeats, seed=seed)
    names = feature_names(system.normalizer.include_verified)
    return sorted(zip(names, imp.tolist()), key=lambda t: (-t[1], t[0]))
