"""External data access: JSON-RPC, explorer, selector resolver, snapshots, monitor."""

from advcontract.chain.address import contract_address
from advcontract.chain.benign import build_benign_candidates, classify_benign_candidates, unique_callers
from advcontract.chain.explorer import EtherscanExplorer, ExplorerError, Verification, get_verification_status
from advcontract.chain.monitor import DeploymentEvent, StreamError, events_in_block, watch_blocks
from advcontract.chain.resolver import FourByteClient, SelectorResolver, resolve_selector
from advcontract.chain.rpc import JsonRpcClient, RPCError
from advcontract.chain.snapshot import MODES, CallGate, ReplayMissError, SnapshotStore, request_key

__all__ = [
    "MODES",
    "CallGate",
    "DeploymentEvent",
    "EtherscanExplorer",
    "ExplorerError",
    "FourByteClient",
    "JsonRpcClient",
    "RPCError",
    "ReplayMissError",
    "SelectorResolver",
    "SnapshotStore",
    "StreamError",
    "Verification",
    "build_benign_candidates",
    "classify_benign_candidates",
    "contract_address",
    "events_in_block",
    "get_verification_status",
    "request_key",
    "resolve_selector",
    "unique_callers",
    "watch_blocks",
]
