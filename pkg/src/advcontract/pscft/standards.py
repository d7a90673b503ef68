from __future__ import annotations

from advcontract.evm.functions import count_opcode
from advcontract.evm.ir import ContractIR
from advcontract.hashing import selector_of

TOKEN_ERC20 = "token-ERC20"
TOKEN_ERC721 = "token-ERC721"
PROXY_ERC1967 = "proxy-ERC1967"
OTHER = "other"

# keccak256("eip1967.proxy.implementation") - 1
ERC1967_SLOT = 0x360894A13BA1A3210667C828492DB98DCA3E2076CC3735A920A3CA505D382BBC

ERC20_SELECTORS = frozenset(
    selector_of(s)
    for s in (
        "totalSupply()",
        "balanceOf(address)",
        "transfer(address,uint256)",
        "transferFrom(address,address,uint256)",
        "approve(address,uint256)",
        "allowance(address,address)",
    )
)
ERC721_SELECTORS = frozenset(
    selector_of(s)
    for s in (
        "balanceOf(address)",
        "ownerOf(uint256)",
        "safeTransferFrom(address,address,uint256,bytes)",
        "safeTransferFrom(address,address,uint256)",
        "transferFrom(address,address,uint256)",
        "approve(address,uint256)",
        "setApprovalForAll(address,bool)",
        "getApproved(uint256)",
        "isApprovedForAll(address,address)",
    )
)
ERC1967_SLOT_BYTES = ERC1967_SLOT.to_bytes(32, "big")


def detect_standard_contract(ir: ContractIR) -> str:
    sels = {f.selector for f in ir.functions if f.visibility == "public"}
    if ERC721_SELECTORS <= sels:
        return TOKEN_ERC721
    if ERC20_SELECTORS <= sels:
        return TOKEN_ERC20
    if ERC1967_SLOT_BYTES in ir.runtime_bytecode:
        return PROXY_ERC1967
    if not sels and count_opcode(ir, "DELEGATECALL") > 0:
        return PROXY_ERC1967
    return OTHER


def is_token_or_proxy(ir: ContractIR) -> bool:
    return detect_standard_contract(ir) != OTHER
