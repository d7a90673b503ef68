"""Single-contract analysis: fetch context, lift, PSCFT, features, inference.

Every external lookup (explorer, funding graph, remote selector database,
verified contract names) is charged to ``external_fetch_s`` even when it
happens in the middle of lifting, so the three stage timings partition the
wall time of an analysis.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any

from advcontract.chain.explorer import get_verification_status
from advcontract.chain.monitor import DeploymentEvent
from advcontract.chain.snapshot import ReplayMissError
from advcontract.evm import lift, split_creation_code
from advcontract.features.deployment import extract_deployment_features
from advcontract.features.implementation import FeatureConfig, extract_implementation_features
from advcontract.features.model import FeatureRecord
from advcontract.fundsource.trace import FundTracer
from advcontract.labels import AddressLabelDB, FundSourceCategory, normalize_address
from advcontract.pscft import DBLabelProvider, build_pscft

REPORT_SCHEMA = "advcontract.report/1"
ALERT_SCHEMA = "advcontract.alert/1"
STAGES = ("external_fetch_s", "lift_and_pscft_s", "inference_s")


class AnalysisError(RuntimeError):
    pass


class StageClock:
    """Accumulates time per stage. A nested stage pauses its parent."""

    def __init__(self) -> None:
        self.timings = dict.fromkeys(STAGES, 0.0)
        self._open: list[list] = []

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        frame = [name, start]
        self._open.append(frame)
        try:
            yield
        finally:
            self._open.pop()
            now = time.perf_counter()
            self.timings[name] += now - frame[1]
            if self._open:
                self._open[-1][1] += now - start


class _TimedResolver:
    def __init__(self, inner, clock: StageClock):
        self.inner, self.clock = inner, clock

    def resolve(self, selector: bytes) -> str | None:
        with self.clock.stage("external_fetch_s"):
            return self.inner.resolve(selector)

    def get(self, selector: bytes, default=None):
        return self.resolve(selector) or default


class _TimedLabels:
    def __init__(self, inner, clock: StageClock):
        self.inner, self.clock = inner, clock

    def label_for(self, address: bytes) -> str | None:
        with self.clock.stage("external_fetch_s"):
            return self.inner.label_for(address)


@dataclass
class AnalysisContext:
    labels: AddressLabelDB
    explorer: Any = None
    tracer: FundTracer | None = None
    resolver: Any = None
    rpc: Any = None
    system: Any = None  # TrainedSystem
    feature_config: FeatureConfig = field(default_factory=FeatureConfig.default)
    explorer_names: bool = True

    def label_provider(self) -> DBLabelProvider:
        names = None
        if self.explorer is not None and self.explorer_names:
            explorer = self.explorer

            def names(address: bytes) -> str | None:
                try:
                    return explorer.contract_name(address)
                except ReplayMissError:
                    raise
                except Exception:
                    return None

        return DBLabelProvider(self.labels, names)


@dataclass
class AnalysisReport:
    contract_id: str
    record: FeatureRecord | None
    fund_path: list[str]
    pscft_tokens: int
    pscft_functions: int
    prediction: Any  # Prediction | None
    timings: dict[str, float]
    wall_s: float
    diagnostics: list[str]
    error: str | None = None
    event: DeploymentEvent | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def adversarial(self) -> bool:
        return self.prediction is not None and self.prediction.label_pred == 1

    @property
    def order_key(self) -> tuple[int, int]:
        return self.event.order_key if self.event else (0, 0)

    def exit_code(self) -> int:
        if not self.ok:
            return 2
        return 10 if self.adversarial else 0

    def to_dict(self) -> dict:
        rec = self.record
        return {
            "schema": REPORT_SCHEMA,
            "contract_id": self.contract_id,
            "block_number": self.event.block_number if self.event else None,
            "tx_index": self.event.tx_index if self.event else None,
            "deployment": rec.deployment.to_dict() if rec else None,
            "implementation": rec.implementation.to_dict() if rec else None,
            "fund_source": rec.deployment.fund_source.value if rec else None,
            "fund_path": list(self.fund_path),
            "pscft": {"token_count": self.pscft_tokens, "function_count": self.pscft_functions},
            "prediction": self.prediction.to_dict() if self.prediction is not None else None,
            "timings": dict(self.timings),
            "wall_s": self.wall_s,
            "diagnostics": list(self.diagnostics),
            "error": self.error,
            "exit_code": self.exit_code(),
        }

    def alert(self) -> dict:
        """Timing-free record, so replays produce identical alert logs."""
        ev = self.event
        return {
            "schema": ALERT_SCHEMA,
            "block_number": ev.block_number if ev else None,
            "tx_index": ev.tx_index if ev else None,
            "contract_id": self.contract_id,
            "creator": ev.creator_address if ev else None,
            "tx_hash": ev.tx_hash if ev else None,
            "p_pred": self.prediction.p_pred,
            "p_classifier": self.prediction.p_classifier,
            "p_transformer": self.prediction.p_transformer,
            "fund_source": self.record.deployment.fund_source.value,
        }

    def summary(self) -> str:
        return format_summary(self.to_dict())


def format_summary(d: dict) -> str:
    """One-line human summary of a report dict."""
    if d.get("error"):
        return f"{d['contract_id']}: analysis error: {d['error']}"
    t = d["timings"]
    times = f"fetch {t['external_fetch_s']:.3f}s, lift+pscft {t['lift_and_pscft_s']:.3f}s, " \
            f"inference {t['inference_s']:.4f}s"
    p = d.get("prediction")
    if p is None:
        verdict = "no model bundle, features only"
    else:
        verdict = f"{'ADVERSARIAL' if p['label_pred'] else 'benign'} (p_pred={p['p_pred']:.4f})"
    return f"{d['contract_id']}: {verdict}; fund source {d['fund_source']}; " \
           f"{d['pscft']['function_count']} functions, {d['pscft']['token_count']} PSCFT tokens; {times}"


def analyze_event(
    ev: DeploymentEvent,
    ctx: AnalysisContext,
    label: int | None = None,
    verified: bool | None = None,
    fund: FundSourceCategory | None = None,
    clock: StageClock | None = None,
    t0: float | None = None,
) -> AnalysisReport:
    """Analyze one deployment. `verified` / `fund` override the lookups when
    the caller already knows them. Errors are captured in the report."""
    t0 = time.perf_counter() if t0 is None else t0
    clock = clock or StageClock()
    diags: list[str] = []
    record, prediction, path, n_tok, n_fn, error = None, None, [], 0, 0, None
    try:
        with clock.stage("external_fetch_s"):
            if verified is None:
                if ctx.explorer is None:
                    verified = False
                    diags.append("no explorer configured; treated as unverified")
                else:
                    verified = get_verification_status(ctx.explorer, ev.contract_address, diags)
            if fund is None:
                if ctx.tracer is None:
                    fund = FundSourceCategory.UNKNOWN
                    diags.append("no funding provider configured; fund source Unknown")
                else:
                    tr = ctx.tracer.trace(ev.creator_address)
                    fund, path = tr.category, list(tr.path)
                    diags += tr.diagnostics
        with clock.stage("lift_and_pscft_s"):
            if not ev.creation_input:
                raise AnalysisError("empty bytecode")
            runtime, d = split_creation_code(ev.creation_input)
            diags += d
            if not runtime:
                raise AnalysisError("no runtime code in creation input")
            resolver = _TimedResolver(ctx.resolver, clock) if ctx.resolver is not None else None
            addr = bytes.fromhex(ev.contract_address.removeprefix("0x")) if ev.contract_address else None
            ir = lift(runtime, addr, resolver)
            diags += list(ir.diagnostics)
            if not ir.functions:
                raise AnalysisError("lifter recovered no functions")
            _, doc = build_pscft(ir, resolver, _TimedLabels(ctx.label_provider(), clock))
            n_tok, n_fn = len(doc.token_stream), doc.function_count
            impl = extract_implementation_features(ir, ctx.feature_config)
            tx = {"to": None, "nonce": ev.nonce, "value": ev.value, "input": ev.creation_input}
            dep = extract_deployment_features(tx, {"gasUsed": ev.gas_used}, verified, fund)
            record = FeatureRecord(
                contract_id=ev.contract_address or doc.contract_id,
                deployment=dep,
                implementation=impl,
                pscft=doc.text,
                label=label,
                deploy_timestamp=ev.block_timestamp,
                meta={"block_number": ev.block_number, "tx_index": ev.tx_index, "creator": ev.creator_address,
                      "tx_hash": ev.tx_hash},
            )
        if ctx.system is not None:
            with clock.stage("inference_s"):
                prediction = ctx.system.predict(record)
    except Exception as exc:  # a replay-strict snapshot miss lands here too
        error = f"{type(exc).__name__}: {exc}"
        diags.append(error)
    wall = time.perf_counter() - t0
    return AnalysisReport(
        contract_id=ev.contract_address or (record.contract_id if record else "unknown"),
        record=record,
        fund_path=path,
        pscft_tokens=n_tok,
        pscft_functions=n_fn,
        prediction=prediction,
        timings=dict(clock.timings),
        wall_s=wall,
        diagnostics=diags,
        error=error,
        event=ev,
    )


def event_from_chain(address: str, ctx: AnalysisContext) -> DeploymentEvent:
    """Rebuild the deployment event of a contract from explorer + RPC data."""
    if ctx.explorer is None or ctx.rpc is None:
        raise AnalysisError("analyzing an address needs both an explorer and an RPC endpoint")
    address = normalize_address(address)
    created = ctx.explorer.contract_creation(address)
    if not created:
        raise AnalysisError(f"no creation record for {address}")
    tx = ctx.rpc.get_transaction(created["txHash"])
    receipt = ctx.rpc.get_receipt(created["txHash"]) or {}
    if tx is None:
        raise AnalysisError(f"creation transaction {created['txHash']} not found")
    if tx.get("to") not in (None, "", "0x"):
        raise AnalysisError(f"{address} was created by an internal call; creation input unavailable")
    block_no = int(tx["blockNumber"], 16)
    block = ctx.rpc.get_block(block_no, False) or {}
    return DeploymentEvent(
        contract_address=address,
        creator_address=tx["from"].lower(),
        tx_hash=created["txHash"],
        block_number=block_no,
        tx_index=int(tx.get("transactionIndex", "0x0"), 16),
        block_timestamp=int(block.get("timestamp", "0x0"), 16),
        creation_input=bytes.fromhex((tx.get("input") or "0x").removeprefix("0x")),
        value=int(tx.get("value", "0x0"), 16),
        gas_used=int(receipt.get("gasUsed", "0x0"), 16),
        nonce=int(tx.get("nonce", "0x0"), 16),
    )


def analyze_address(address: str, ctx: AnalysisContext) -> AnalysisReport:
    t0 = time.perf_counter()
    clock = StageClock()
    try:
        with clock.stage("external_fetch_s"):
            ev = event_from_chain(address, ctx)
    except Exception as exc:
        return failed_report(normalize_address(address), f"{type(exc).__name__}: {exc}", clock, t0)
    return analyze_event(ev, ctx, clock=clock, t0=t0)


def parse_code(text: str | bytes) -> bytes:
    """Hex text (optional 0x, whitespace ignored) or raw bytes."""
    if isinstance(text, bytes):
        try:
            text = text.decode("ascii")
        except UnicodeDecodeError:
            return text
    s = "".join(text.split()).removeprefix("0x")
    if len(s) % 2:
        raise ValueError("hex bytecode has an odd number of digits")
    return bytes.fromhex(s)


def event_from_sidecar(code: bytes, deployment: dict | None) -> DeploymentEvent:
    d = deployment or {}
    return DeploymentEvent(
        contract_address=normalize_address(d["contract_address"]) if d.get("contract_address") else "",
        creator_address=normalize_address(d["creator_address"]) if d.get("creator_address") else "",
        tx_hash=d.get("tx_hash", ""),
        block_number=int(d.get("block_number", 0)),
        tx_index=int(d.get("tx_index", 0)),
        block_timestamp=int(d.get("block_timestamp", 0)),
        creation_input=code,
        value=int(d.get("value", 0)),
        gas_used=int(d.get("gas_used", 0)),
        nonce=int(d.get("nonce", 0)),
    )


def analyze_code(code: bytes, ctx: AnalysisContext, deployment: dict | None = None) -> AnalysisReport:
    """Analyze creation or runtime bytecode. The optional deployment sidecar
    supplies transaction context; `verified` and `fund_source` keys there
    skip the corresponding lookups."""
    d = deployment or {}
    ev = event_from_sidecar(code, d)
    verified = d.get("verified")
    fund = FundSourceCategory.parse(d["fund_source"]) if d.get("fund_source") else None
    pre = []
    if not d:
        pre.append("no deployment context given; deployment features take neutral defaults")
    if not ev.creator_address and fund is None:
        fund = FundSourceCategory.UNKNOWN
    if not ev.contract_address and verified is None:
        verified = False
    rep = analyze_event(ev, ctx, verified=None if verified is None else bool(verified), fund=fund)
    rep.diagnostics[:0] = pre
    return rep


def failed_report(cid: str, error: str, clock: StageClock | None = None, t0: float | None = None) -> AnalysisReport:
    clock = clock or StageClock()
    t0 = time.perf_counter() if t0 is None else t0
    return AnalysisReport(cid, None, [], 0, 0, None, dict(clock.timings), time.perf_counter() - t0, [error], error)
