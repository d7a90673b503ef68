from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

from advcontract.labels import FundSourceCategory


@dataclass(frozen=True)
class DeploymentFeatures:
    nonce: int
    fund_source: FundSourceCategory
    value_flag: bool
    input_data_length: int
    gas_used: int
    verified: bool

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["fund_source"] = self.fund_source.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DeploymentFeatures":
        return cls(
            nonce=int(d["nonce"]),
            fund_source=FundSourceCategory.parse(d["fund_source"]),
            value_flag=bool(d["value_flag"]),
            input_data_length=int(d["input_data_length"]),
            gas_used=int(d["gas_used"]),
            verified=bool(d["verified"]),
        )


@dataclass(frozen=True)
class ImplementationFeatures:
    func_count: int = 0
    public_func_count: int = 0
    flashloan_callback_count: int = 0
    flashloan_callback_ratio: float = 0.0
    token_call_count: int = 0
    token_call_ratio: float = 0.0
    max_token_call_count: int = 0
    avg_token_call_count: float = 0.0
    delegate_call_count: int = 0
    selfdestruct_count: int = 0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ImplementationFeatures":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})


@dataclass
class FeatureRecord:
    contract_id: str
    deployment: DeploymentFeatures
    implementation: ImplementationFeatures
    pscft: str = ""
    label: int | None = None
    deploy_timestamp: int = 0
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.label is not None and self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "contract_id": self.contract_id,
            "deploy_timestamp": self.deploy_timestamp,
            "label": self.label,
            "deployment": self.deployment.to_dict(),
            "implementation": self.implementation.to_dict(),
            "pscft": self.pscft,
            "meta": dict(sorted(self.meta.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureRecord":
        return cls(
            contract_id=d["contract_id"],
            deployment=DeploymentFeatures.from_dict(d["deployment"]),
            implementation=ImplementationFeatures.from_dict(d["implementation"]),
            pscft=d.get("pscft", ""),
            label=d.get("label"),
            deploy_timestamp=int(d.get("deploy_timestamp", 0)),
            meta=dict(d.get("meta", {})),
        )
