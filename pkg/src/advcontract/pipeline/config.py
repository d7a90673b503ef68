"""Pipeline configuration: INI file, ADVC_* environment overrides, CLI overrides.

File format (one ``[advcontract]`` section, ``key = value`` lines)::

    [advcontract]
    rpc_url = https://eth.example/rpc
    explorer_url = https://api.etherscan.io/api
    explorer_api_key = ...
    fourbyte_url = https://www.4byte.directory/api/v1/signatures/
    snapshot = snapshots/run1
    mode = replay-strict
    signatures = my_signatures.txt
    labels = my_labels.csv
    model = bundle/
    from_block = 19000000
    to_block = 19000100
    benign_min_callers = 10
    fund_trace_depth = 10
    workers = 4
    alert_log = alerts.jsonl
    timings_log = timings.jsonl
    seed = 0
    include_verified = true

Precedence: CLI flag > environment (ADVC_RPC_URL, ADVC_MODE, ...) > file > default.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

import httpx

from advcontract.chain.explorer import EtherscanExplorer
from advcontract.chain.resolver import FOURBYTE_URL, FourByteClient, SelectorResolver
from advcontract.chain.rpc import JsonRpcClient
from advcontract.chain.snapshot import MODES, CallGate, SnapshotStore
from advcontract.features.implementation import FeatureConfig
from advcontract.fundsource.providers import ExplorerFundingProvider
from advcontract.fundsource.trace import DEFAULT_MAX_DEPTH, FundTracer
from advcontract.labels import AddressLabelDB, default_label_db
from advcontract.pipeline.core import AnalysisContext
from advcontract.signatures import SignatureDB, default_signature_db

SECTION = "advcontract"
ENV_PREFIX = "ADVC_"


@dataclass(frozen=True)
class PipelineConfig:
    rpc_url: str | None = None
    explorer_url: str | None = None
    explorer_api_key: str | None = None
    fourbyte_url: str | None = FOURBYTE_URL
    snapshot: str | None = None
    mode: str = "live"
    signatures: str | None = None
    labels: str | None = None
    model: str | None = None
    from_block: int | None = None
    to_block: int | None = None
    benign_min_callers: int = 10
    fund_trace_depth: int = DEFAULT_MAX_DEPTH
    workers: int = 0  # 0: one per CPU core
    alert_log: str | None = None
    timings_log: str | None = None
    seed: int = 0
    include_verified: bool = True

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode != "live" and not self.snapshot:
            raise ValueError(f"mode {self.mode} needs a snapshot path")
        if self.benign_min_callers < 0 or self.fund_trace_depth < 1:
            raise ValueError("benign_min_callers must be >= 0 and fund_trace_depth >= 1")

    @property
    def n_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    def with_overrides(self, **kw) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _coerce(name: str, raw: str):
    typ = {f.name: f.type for f in fields(PipelineConfig)}[name]
    raw = raw.strip()
    if "bool" in str(typ):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if "int" in str(typ):
        return int(raw) if raw else None
    return raw or None


def load_config(path: str | Path | None = None, env: dict | None = None, **overrides) -> PipelineConfig:
    known = {f.name for f in fields(PipelineConfig)}
    values: dict = {}
    if path is not None:
        cp = configparser.ConfigParser()
        if not cp.read(path):
            raise FileNotFoundError(f"config file {path} not found")
        if not cp.has_section(SECTION):
            raise ValueError(f"config file {path} has no [{SECTION}] section")
        for k, v in cp.items(SECTION):
            if k not in known:
                raise ValueError(f"config file {path}: unknown key {k!r}")
            values[k] = _coerce(k, v)
    env = os.environ if env is None else env
    for k in known:
        if ENV_PREFIX + k.upper() in env:
            values[k] = _coerce(k, env[ENV_PREFIX + k.upper()])
    values.update({k: v for k, v in overrides.items() if v is not None})
    return PipelineConfig(**values)


def make_gate(cfg: PipelineConfig) -> CallGate:
    store = SnapshotStore(cfg.snapshot) if cfg.snapshot else None
    return CallGate(store, cfg.mode)


def build_context(cfg: PipelineConfig, system=None, http: httpx.Client | None = None,
                  gate: CallGate | None = None) -> AnalysisContext:
    """Wire clients for a run. All network access goes through one CallGate,
    so replay-strict runs never touch the network."""
    gate = gate or make_gate(cfg)
    labels = AddressLabelDB.load(cfg.labels) if cfg.labels else default_label_db()
    sigs = default_signature_db()
    if cfg.signatures:
        # operator entries are added on top of the bundled database
        for sel, sig in (ln.split(",", 1) for ln in SignatureDB.load(cfg.signatures).dump().splitlines()):
            sigs.add(sel, sig)
    rpc = JsonRpcClient(cfg.rpc_url, gate, http) if cfg.rpc_url or cfg.snapshot else None
    explorer = EtherscanExplorer(cfg.explorer_url, cfg.explorer_api_key, gate, http) \
        if cfg.explorer_url or cfg.snapshot else None
    remote = FourByteClient(cfg.fourbyte_url, gate, http) if cfg.fourbyte_url else None
    tracer = FundTracer(ExplorerFundingProvider(explorer), labels, cfg.fund_trace_depth) if explorer else None
    return AnalysisContext(
        labels=labels,
        explorer=explorer,
        tracer=tracer,
        resolver=SelectorResolver(sigs, remote),
        rpc=rpc,
        system=system,
        feature_config=FeatureConfig.default(),
    )
