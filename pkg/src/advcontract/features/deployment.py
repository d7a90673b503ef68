from __future__ import annotations

from typing import Any, Mapping

from advcontract.features.model import DeploymentFeatures
from advcontract.labels import FundSourceCategory


class NotADeploymentError(ValueError):
    pass


def as_int(v: Any) -> int:
    if v is None:
        return 0
    if isinstance(v, str):
        return int(v, 16) if v.lower().startswith("0x") else int(v)
    return int(v)


def input_bytes(tx: Mapping[str, Any]) -> bytes:
    data = tx.get("input", tx.get("data", "")) or ""
    if isinstance(data, (bytes, bytearray)):
        return bytes(data)
    data = data[2:] if data.lower().startswith("0x") else data
    return bytes.fromhex(data)


def extract_deployment_features(
    tx: Mapping[str, Any],
    receipt: Mapping[str, Any],
    verified: bool,
    fund: FundSourceCategory,
) -> DeploymentFeatures:
    """Deployment-stage features from a JSON-RPC style transaction and receipt."""
    if tx.get("to") not in (None, "", "0x"):
        raise NotADeploymentError(f"transaction has recipient {tx.get('to')}; not a contract creation")
    return DeploymentFeatures(
        nonce=as_int(tx.get("nonce")),
        fund_source=fund,
        value_flag=as_int(tx.get("value")) > 0,
        input_data_length=len(input_bytes(tx)),
        gas_used=as_int(receipt.get("gasUsed", receipt.get("gas_used"))),
        verified=bool(verified),
    )


def compute_rescue_window(t_first: float, t_deploy: float, t_pred: float) -> float:
    """Seconds left to react after detection; negative means the window was missed."""
    if t_first < t_deploy:
        raise ValueError("first attack transaction precedes deployment")
    if t_pred < 0:
        raise ValueError("prediction time must be non-negative")
    return t_first - t_deploy - t_pred


def rescue_missed(window: float) -> bool:
    return window < 0
