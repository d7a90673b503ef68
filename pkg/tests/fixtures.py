"""Hand-built contract fixtures with hand-counted implementation features."""

from __future__ import annotations

from advcontract.evm.asm import assemble_text
from advcontract.hashing import selector_of
from advcontract.synth.codegen import Branch, Call, ContractBlueprint, Create, FunctionSpec, PrivateCall, render_runtime

TOKEN = bytes.fromhex("a0b86991c6218b36c1d19d4a2e9eb0ce3606eb48")
POOL = bytes.fromhex("5777d92f208679db4b9778590fa3cab3ac9e2168")
TRANSFER = selector_of("transfer(address,uint256)")
APPROVE = selector_of("approve(address,uint256)")
BALANCE = selector_of("balanceOf(address)")
FLASH = selector_of("flash(address,uint256,uint256,bytes)")
V2CALL = selector_of("uniswapV2Call(address,uint256,uint256,bytes)")
ONFLASH = selector_of("onFlashLoan(address,address,uint256,uint256,bytes)")
V3CB = selector_of("uniswapV3FlashCallback(uint256,uint256,bytes)")


def sel(i: int) -> bytes:
    return (0xC0DE0000 + i).to_bytes(4, "big")


def tcall(s: bytes, op: str = "CALL", target: bytes | None = TOKEN) -> Call:
    return Call(op, target, s)


# name -> (runtime bytecode, expected features as
#   func, pub, flash, flash_ratio, tok, tok_ratio, max, avg, delegate, selfdestruct)
def feature_fixtures() -> dict[str, tuple[bytes, tuple]]:
    fx = {}
    fx["empty_dispatcher"] = (render_runtime(ContractBlueprint()), (0, 0, 0, 0.0, 0, 0.0, 0, 0.0, 0, 0))
    fx["two_publics_3_1"] = (
        render_runtime(
            ContractBlueprint(
                [
                    FunctionSpec(sel(1), [tcall(TRANSFER), tcall(TRANSFER), tcall(TRANSFER)]),
                    FunctionSpec(sel(2), [tcall(APPROVE)]),
                ]
            )
        ),
        (2, 2, 0, 0.0, 4, 1.0, 3, 2.0, 0, 0),
    )
    fx["flash_callback_half"] = (
        render_runtime(
            ContractBlueprint(
                [FunctionSpec(V2CALL, [tcall(TRANSFER), Call("CALL", POOL, None)]), FunctionSpec(sel(3), [])]
            )
        ),
        (2, 2, 1, 0.5, 1, 0.5, 1, 0.5, 0, 0),
    )
    fx["shared_helper"] = (
        render_runtime(
            ContractBlueprint(
                [
                    FunctionSpec(sel(4), [Call("CALL", POOL, FLASH), PrivateCall(0)]),
                    FunctionSpec(sel(5), [PrivateCall(0)]),
                ],
                helpers=[[tcall(TRANSFER), tcall(BALANCE, "STATICCALL")]],
            )
        ),
        (3, 2, 0, 0.0, 2, 2 / 3, 2, 2.0, 0, 0),
    )
    fx["delegate_three"] = (
        render_runtime(
            ContractBlueprint(
                [FunctionSpec(sel(6), [Call("DELEGATECALL", TOKEN, None), Call("DELEGATECALL", None, None)])],
                fallback="delegate",
                delegate_target=POOL,
            )
        ),
        (1, 1, 0, 0.0, 0, 0.0, 0, 0.0, 3, 0),
    )
    fx["two_selfdestructs"] = (
        render_runtime(
            ContractBlueprint(
                [FunctionSpec(sel(7), [], selfdestruct=True), FunctionSpec(sel(8), [tcall(APPROVE)], selfdestruct=True)]
            )
        ),
        (2, 2, 0, 0.0, 1, 1.0, 1, 0.5, 0, 2),
    )
    # opcode bytes 0xf4/0xff inside a PUSH32 immediate must not count
    fx["hidden_in_push"] = (
        assemble_text("PUSH32 0x" + "f4ff" * 16 + "\nPOP\nPUSH1 0x00\nPUSH2 0xf4ff\nPOP\nCALLER\nSELFDESTRUCT"),
        (0, 0, 0, 0.0, 0, 0.0, 0, 0.0, 0, 1),
    )
    fx["branches"] = (
        render_runtime(
            ContractBlueprint(
                [
                    FunctionSpec(sel(9), [Branch((tcall(TRANSFER),)), tcall(TRANSFER), Branch((Branch((tcall(APPROVE),)),))]),
                    FunctionSpec(sel(10), [tcall(BALANCE, "STATICCALL")]),
                    FunctionSpec(ONFLASH, []),
                ]
            )
        ),
        (3, 3, 1, 1 / 3, 4, 1.0, 3, 4 / 3, 0, 0),
    )
    fx["mutual_recursion"] = (
        render_runtime(
            ContractBlueprint(
                [FunctionSpec(sel(11), [PrivateCall(0)]), FunctionSpec(sel(12), [PrivateCall(1)])],
                helpers=[[tcall(TRANSFER), PrivateCall(1)], [tcall(APPROVE), Branch((PrivateCall(0),))]],
            )
        ),
        (4, 2, 0, 0.0, 2, 1.0, 2, 2.0, 0, 0),
    )
    fx["creates_and_raw"] = (
        render_runtime(
            ContractBlueprint(
                [
                    FunctionSpec(
                        sel(13),
                        [Create("CREATE"), Create("CREATE2"), tcall(BALANCE, "STATICCALL", None), Call("CALL", None, None), PrivateCall(0)],
                    ),
                    FunctionSpec(sel(14), [PrivateCall(0)]),
                    FunctionSpec(V3CB, []),
                ],
                helpers=[[tcall(TRANSFER, "DELEGATECALL")]],
            )
        ),
        (4, 3, 1, 1 / 3, 2, 2 / 3, 2, 1.0, 1, 0),
    )
    return fx


FIELDS = (
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
