"""A synthetic chain of contract deployments with known labels.

Each contract comes from a class-conditional blueprint rendered to real
bytecode, so features are always computed by lifting. Deployment context
(fund source, verification, nonce, value) is drawn per class:

    adversarial: ~78% Anonymous-funded, ~0.5% verified, flashloan callback ~65%
    benign:      ~80% Safe-funded, ~90% verified, flashloan callback ~0.5%

The world is served two ways from the same data: in-memory explorer/RPC
objects (fast dataset generation) and an httpx transport speaking JSON-RPC,
the explorer API and a 4byte-style lookup (end-to-end runs and snapshots).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from urllib.parse import parse_qs

import httpx

from advcontract.chain.address import contract_address
from advcontract.fundsource.providers import Transfer
from advcontract.hashing import selector_of
from advcontract.labels import AddressLabelDB, FundSourceCategory, default_label_db
from advcontract.synth.codegen import (
    Branch,
    Call,
    ContractBlueprint,
    Create,
    Filler,
    FunctionSpec,
    PrivateCall,
    render_creation,
    render_runtime,
)

RPC_URL = "http://rpc.synthetic/"
EXPLORER_URL = "http://explorer.synthetic/api"
FOURBYTE_URL = "http://4byte.synthetic/api/v1/signatures/"

GENESIS_TIME = 1_700_000_000
BLOCK_TIME = 12


def _a(h: str) -> bytes:
    return bytes.fromhex(h.removeprefix("0x"))


UNISWAP_V3 = _a("0x5777d92f208679db4b9778590fa3cab3ac9e2168")
UNISWAP_V3_B = _a("0x88e6a0c2ddd26feeb64f039a2c41296fcb3f5640")
ROUTER = _a("0x7a250d5630b4cf539739df2c5dacb4c659f2488d")
AAVE = _a("0x7d2768de32b0b80b7a3454c06bdac94a69ddc7a9")
BALANCER = _a("0xba12222222228d8ba445958a75a0704d566bf2c8")
USDC = _a("0xa0b86991c6218b36c1d19d4a2e9eb0ce3606eb48")
WETH = _a("0xc02aaa39b223fe8d0a0e5c4f27ead9083c756cc2")
TOKENS = (USDC, WETH)
POOLS = (UNISWAP_V3, UNISWAP_V3_B)

SOURCES = {
    FundSourceCategory.SAFE: (
        "0x28c6c06298d514db089934071355e5743bf21d60",
        "0x3f5ce5fbfe3e9af3971dd833d26ba9b5c936f0be",
        "0x71660c4005ba85c37ccec55d0c4493e66fe775d3",
        "0x2910543af39aba0cd09dbb2d50200b3e800a63d2",
    ),
    FundSourceCategory.ANONYMOUS: (
        "0x12d66f87a04a9e220743712ce6d9bb1b5616b8fc",
        "0x47ce0c6ed5b0ce3d3a51fdb1c52dc66a7c3c2936",
        "0x910cbd523d972eb0a6f4cae4618ad62622b39dbf",
        "0xa160cdab225685da1d56aa342ad8841c3b53f291",
    ),
    FundSourceCategory.BRIDGE: (
        "0x8315177ab297ba92a06054ce80a67ed4dbd7ed3a",
        "0x99c9fc46f92e8a1c0dec1b1747d010903e884be1",
    ),
}

S = selector_of
TRANSFER, APPROVE, BALANCE_OF = S("transfer(address,uint256)"), S("approve(address,uint256)"), S("balanceOf(address)")
TRANSFER_FROM = S("transferFrom(address,address,uint256)")
DEPOSIT, WITHDRAW, SYNC, SKIM = S("deposit()"), S("withdraw(uint256)"), S("sync()"), S("skim(address)")
GET_RESERVES, PAIR_SWAP = S("getReserves()"), S("swap(uint256,uint256,address,bytes)")
ROUTER_SWAP = S("swapExactTokensForTokens(uint256,uint256,address[],address,uint256)")
FLASH = S("flash(address,uint256,uint256,bytes)")
AAVE_FLASH = S("flashLoan(address,address[],uint256[],uint256[],address,bytes,uint16)")
BALANCER_FLASH = S("flashLoan(address,address[],uint256[],bytes)")
CALLBACKS = tuple(
    S(s)
    for s in (
        "uniswapV2Call(address,uint256,uint256,bytes)",
        "uniswapV3FlashCallback(uint256,uint256,bytes)",
        "pancakeCall(address,uint256,uint256,bytes)",
        "executeOperation(address[],uint256[],uint256[],address,bytes)",
        "onFlashLoan(address,address,uint256,uint256,bytes)",
        "receiveFlashLoan(address[],uint256[],uint256[],bytes)",
        "DVMFlashLoanCall(address,uint256,uint256,bytes)",
    )
)
BENIGN_NAMED = tuple(
    S(s) for s in ("owner()", "name()", "symbol()", "multicall(bytes[])", "implementation()", "decimals()")
)
ERC20_CORE = tuple(
    S(s)
    for s in (
        "totalSupply()",
        "balanceOf(address)",
        "transfer(address,uint256)",
        "transferFrom(address,address,uint256)",
        "approve(address,uint256)",
        "allowance(address,address)",
    )
)
NAMES_BENIGN = ("Vault", "Staking", "Governor", "Treasury", "Registry", "Distributor", "Escrow", "Farm", "Oracle")


def _pick(rng: random.Random, weights: dict):
    r = rng.random() * sum(weights.values())
    for k, w in weights.items():
        r -= w
        if r < 0:
            return k
    return k


def _rand_sel(rng: random.Random) -> bytes:
    return rng.getrandbits(32).to_bytes(4, "big")


def _token_call(rng: random.Random) -> Call:
    kind = _pick(rng, {"transfer": 4, "approve": 3, "balance": 3, "from": 1, "swap": 3, "router": 2,
                       "deposit": 1, "withdraw": 1, "reserves": 1, "sync": 0.5, "skim": 0.5})
    if kind == "balance":
        return Call("STATICCALL", rng.choice(TOKENS), BALANCE_OF)
    if kind == "reserves":
        return Call("STATICCALL", rng.choice(POOLS), GET_RESERVES)
    target = {"swap": rng.choice(POOLS), "router": ROUTER, "sync": rng.choice(POOLS), "skim": rng.choice(POOLS)}.get(
        kind, rng.choice(TOKENS + (None,))
    )
    sel = {"transfer": TRANSFER, "approve": APPROVE, "from": TRANSFER_FROM, "swap": PAIR_SWAP, "router": ROUTER_SWAP,
           "deposit": DEPOSIT, "withdraw": WITHDRAW, "sync": SYNC, "skim": SKIM}[kind]
    return Call("CALL", target, sel)


def _other_call(rng: random.Random) -> Call:
    op = _pick(rng, {"CALL": 4, "STATICCALL": 4, "DELEGATECALL": 0.3})
    return Call(op, rng.choice((None, None, rng.randbytes(20))), rng.choice((None, _rand_sel(rng), _rand_sel(rng))))


def adversarial_blueprint(rng: random.Random) -> ContractBlueprint:
    helpers = []
    if rng.random() < 0.5:
        helpers = [[_token_call(rng) for _ in range(rng.randint(2, 5))] for _ in range(rng.randint(1, 2))]
    fns = []
    entry = []
    init = _pick(rng, {"v3": 5, "aave": 2, "balancer": 2, "none": 2})
    if init == "v3":
        entry.append(Call("CALL", rng.choice(POOLS), FLASH))
    elif init == "aave":
        entry.append(Call("CALL", AAVE, AAVE_FLASH))
    elif init == "balancer":
        entry.append(Call("CALL", BALANCER, BALANCER_FLASH))
    entry += [_token_call(rng) for _ in range(rng.randint(0, 3))]
    if helpers:
        entry.append(PrivateCall(0))
    fns.append(FunctionSpec(_rand_sel(rng), entry))
    if rng.random() < 0.66:
        body = [_token_call(rng) for _ in range(rng.randint(4, 12))]
        if helpers:
            body.insert(rng.randint(0, len(body)), PrivateCall(rng.randrange(len(helpers))))
        if rng.random() < 0.3:
            body.append(Branch((_token_call(rng),)))
        fns.append(FunctionSpec(rng.choice(CALLBACKS), body))
    else:
        body = [_token_call(rng) for _ in range(rng.randint(3, 9))]
        if helpers:
            body.append(PrivateCall(rng.randrange(len(helpers))))
        fns.append(FunctionSpec(_rand_sel(rng), body))
    for _ in range(rng.randint(0, 2)):
        fns.append(FunctionSpec(_rand_sel(rng), [_token_call(rng) for _ in range(rng.randint(1, 3))],
                                selfdestruct=rng.random() < 0.3))
    if rng.random() < 0.25:
        fns.append(FunctionSpec(_rand_sel(rng), [Call("CALL", None, None)], selfdestruct=rng.random() < 0.5))
    if helpers and sum(isinstance(s, PrivateCall) for f in fns for s in f.steps) < 2:
        fns[-1].steps.append(PrivateCall(0))
    rng.shuffle(fns)
    fallback = rng.choice(("stop", "stop", "revert"))
    return ContractBlueprint(fns, helpers, fallback=fallback, constructor_filler=rng.randint(0, 3))


def benign_blueprint(rng: random.Random) -> ContractBlueprint:
    helpers = [[_other_call(rng) for _ in range(rng.randint(1, 3))] for _ in range(rng.randint(0, 3))]
    defi = rng.random() < 0.3
    fns = []
    for _ in range(rng.randint(3, 14)):
        steps = []
        for _ in range(rng.randint(0, 4)):
            r = rng.random()
            if r < (0.35 if defi else 0.12):
                steps.append(_token_call(rng))
            elif r < 0.6:
                steps.append(_other_call(rng))
            elif r < 0.75 and helpers:
                steps.append(PrivateCall(rng.randrange(len(helpers))))
            elif r < 0.8:
                steps.append(Branch((_other_call(rng),)))
            elif r < 0.82:
                steps.append(Create())
            else:
                steps.append(Filler(rng.randint(1, 6)))
        sel = rng.choice(BENIGN_NAMED) if rng.random() < 0.15 else _rand_sel(rng)
        fns.append(FunctionSpec(sel, steps))
    if rng.random() < 0.005:
        fns.append(FunctionSpec(rng.choice(CALLBACKS), [_token_call(rng) for _ in range(rng.randint(1, 4))]))
    # keep private-function discovery honest: a helper needs two call sites
    for k in range(len(helpers)):
        sites = sum(1 for f in fns for s in f.steps if s == PrivateCall(k))
        for _ in range(max(0, 2 - sites)):
            rng.choice(fns).steps.append(PrivateCall(k))
    seen = set()
    fns = [f for f in fns if not (f.selector in seen or seen.add(f.selector))]
    return ContractBlueprint(fns, helpers, fallback=rng.choice(("revert", "revert", "stop")),
                             constructor_filler=rng.randint(0, 40))


def token_blueprint(rng: random.Random) -> ContractBlueprint:
    fns = [FunctionSpec(s, [Filler(rng.randint(1, 4))]) for s in ERC20_CORE]
    return ContractBlueprint(fns, constructor_filler=rng.randint(2, 10))


@dataclass
class SynthContract:
    address: str
    creator: str
    nonce: int
    label: int
    kind: str  # adversarial | benign | token
    blueprint: ContractBlueprint
    runtime: bytes
    creation: bytes
    block: int
    tx_index: int
    timestamp: int
    verified: bool
    name: str | None
    fund: FundSourceCategory
    value: int
    gas_used: int
    n_callers: int

    @property
    def tx_hash(self) -> str:
        return "0x" + selector_of(f"tx:{self.address}").hex() * 8


@dataclass
class SyntheticWorld:
    contracts: list[SynthContract]
    transfers: list[Transfer]
    labels: AddressLabelDB
    seed: int = 0
    blocks: dict[int, list[SynthContract]] = field(default_factory=dict)
    by_address: dict[str, SynthContract] = field(default_factory=dict)
    incoming: dict[str, list[Transfer]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for c in sorted(self.contracts, key=lambda c: (c.block, c.tx_index)):
            self.blocks.setdefault(c.block, []).append(c)
            self.by_address[c.address] = c
        for t in self.transfers:
            self.incoming.setdefault(t.fundee, []).append(t)

    @property
    def first_block(self) -> int:
        return min(self.blocks)

    @property
    def last_block(self) -> int:
        return max(self.blocks)

    def subset(self, addresses) -> "SyntheticWorld":
        keep = set(addresses)
        return SyntheticWorld([c for c in self.contracts if c.address in keep], self.transfers, self.labels, self.seed)

    # explorer-like view

    def verification_entry(self, address: str) -> dict:
        c = self.by_address.get(address.lower())
        if c is None or not c.verified:
            return {"SourceCode": "", "ContractName": ""}
        return {"SourceCode": f"// synthetic source for {c.name}", "ContractName": c.name or ""}

    def transactions(self, address: str) -> list[dict]:
        address = address.lower()
        out = [
            {"from": t.funder, "to": t.fundee, "value": str(t.value), "blockNumber": str(t.block),
             "transactionIndex": str(t.index), "isError": "0", "timeStamp": str(GENESIS_TIME + BLOCK_TIME * t.block)}
            for t in self.incoming.get(address, [])
        ]
        c = self.by_address.get(address)
        if c is not None:
            for i in range(c.n_callers):
                caller = "0x" + selector_of(f"caller:{c.address}:{i}").hex() * 5
                blk = c.block + 1 + i
                out.append({"from": caller, "to": c.address, "value": "0", "blockNumber": str(blk),
                            "transactionIndex": "0", "isError": "0", "timeStamp": str(GENESIS_TIME + BLOCK_TIME * blk)})
        return sorted(out, key=lambda t: (int(t["blockNumber"]), int(t["transactionIndex"])))

    def internal_transactions(self, address: str) -> list[dict]:
        return []

    def contract_creation(self, address: str) -> dict | None:
        c = self.by_address.get(address.lower())
        return None if c is None else {"contractAddress": c.address, "contractCreator": c.creator, "txHash": c.tx_hash}

    # JSON-RPC view

    def _tx_json(self, c: SynthContract) -> dict:
        return {"hash": c.tx_hash, "from": c.creator, "to": None, "nonce": hex(c.nonce), "value": hex(c.value),
                "input": "0x" + c.creation.hex(), "transactionIndex": hex(c.tx_index), "blockNumber": hex(c.block),
                "gas": hex(c.gas_used + 50_000)}

    def block_json(self, number: int) -> dict | None:
        if not self.blocks or not self.first_block <= number <= self.last_block:
            return None
        txs = [self._tx_json(c) for c in self.blocks.get(number, [])]
        # a plain value transfer in every block exercises the creation filter
        txs.append({"hash": "0x" + selector_of(f"plain:{number}").hex() * 8, "from": "0x" + "11" * 20,
                    "to": "0x" + "22" * 20, "nonce": hex(number), "value": "0x1", "input": "0x",
                    "transactionIndex": hex(len(txs) + 100), "blockNumber": hex(number)})
        return {"number": hex(number), "timestamp": hex(GENESIS_TIME + BLOCK_TIME * number), "transactions": txs}

    def _by_hash(self) -> dict[str, SynthContract]:
        if not hasattr(self, "_hash_index"):
            self._hash_index = {c.tx_hash: c for c in self.contracts}
        return self._hash_index

    def rpc_result(self, method: str, params: list):
        if method == "eth_blockNumber":
            return hex(self.last_block)
        if method == "eth_getBlockByNumber":
            return self.block_json(int(params[0], 16))
        if method == "eth_getTransactionByHash":
            c = self._by_hash().get(params[0])
            return None if c is None else self._tx_json(c)
        if method == "eth_getTransactionReceipt":
            c = self._by_hash().get(params[0])
            if c is None:
                return {"gasUsed": hex(21000), "contractAddress": None, "status": "0x1"}
            return {"gasUsed": hex(c.gas_used), "contractAddress": c.address, "status": "0x1",
                    "blockNumber": hex(c.block), "transactionIndex": hex(c.tx_index)}
        if method == "eth_getCode":
            c = self.by_address.get(params[0].lower())
            return "0x" + (c.runtime.hex() if c else "")
        if method == "eth_getTransactionCount":
            return hex(0)
        raise KeyError(method)

    # HTTP transport

    def handler(self, request: httpx.Request) -> httpx.Response:
        host = request.url.host
        if host == "rpc.synthetic":
            body = json.loads(request.content)
            try:
                res = self.rpc_result(body["method"], body.get("params", []))
            except KeyError:
                err = {"code": -32601, "message": f"method {body['method']} not found"}
                return httpx.Response(200, json={"jsonrpc": "2.0", "id": body.get("id"), "error": err})
            return httpx.Response(200, json={"jsonrpc": "2.0", "id": body.get("id"), "result": res})
        if host == "explorer.synthetic":
            q = {k: v[0] for k, v in parse_qs(request.url.query.decode()).items()}
            action = q.get("action")
            if action == "getsourcecode":
                res = [self.verification_entry(q["address"])]
            elif action == "getcontractcreation":
                hit = self.contract_creation(q["contractaddresses"])
                res = [hit] if hit else []
            elif action == "txlist":
                res = self.transactions(q["address"])
            elif action == "txlistinternal":
                res = []
            else:
                return httpx.Response(200, json={"status": "0", "message": "NOTOK", "result": "unknown action"})
            if not res:
                return httpx.Response(200, json={"status": "0", "message": "No transactions found", "result": []})
            return httpx.Response(200, json={"status": "1", "message": "OK", "result": res})
        if host == "4byte.synthetic":
            return httpx.Response(200, json={"count": 0, "results": []})
        return httpx.Response(404)

    def transport(self) -> httpx.MockTransport:
        return httpx.MockTransport(self.handler)


# generation

FUND_MIX = {
    1: {FundSourceCategory.ANONYMOUS: 0.78, FundSourceCategory.UNKNOWN: 0.12, FundSourceCategory.BRIDGE: 0.06,
        FundSourceCategory.SAFE: 0.04},
    0: {FundSourceCategory.SAFE: 0.80, FundSourceCategory.UNKNOWN: 0.13, FundSourceCategory.BRIDGE: 0.04,
        FundSourceCategory.ANONYMOUS: 0.03},
}


def _funding_chain(rng: random.Random, creator: str, fund: FundSourceCategory, before_block: int) -> list[Transfer]:
    hops = ["0x" + rng.randbytes(20).hex() for _ in range(rng.randint(0, 3))]
    if fund == FundSourceCategory.UNKNOWN:
        source = "0x" + rng.randbytes(20).hex()  # unlabeled, never funded
    else:
        source = rng.choice(SOURCES[fund])
    chain = [source] + hops + [creator]
    blk = max(1, before_block - 50 - 5 * len(chain))
    out = []
    for i, (a, b) in enumerate(zip(chain, chain[1:])):
        out.append(Transfer(a, b, blk + 5 * i, rng.randint(0, 20), rng.randint(1, 100) * 10**17))
    return out


def make_contract(
    rng: random.Random,
    kind: str,
    block: int,
    tx_index: int = 0,
    few_callers: bool = False,
    n_callers: int | None = None,
    fund: FundSourceCategory | None = None,
    verified: bool | None = None,
) -> tuple[SynthContract, list[Transfer]]:
    """One deployment of `kind` (adversarial | benign | token) with its
    funding chain. Keyword overrides pin individual attributes."""
    label = int(kind == "adversarial")
    if kind == "adversarial":
        bp = adversarial_blueprint(rng)
    elif kind == "token":
        bp = token_blueprint(rng)
    else:
        bp = benign_blueprint(rng)
    runtime = render_runtime(bp)
    creation = render_creation(bp, runtime)
    creator = "0x" + rng.randbytes(20).hex()
    if label:
        nonce = min(int(rng.expovariate(0.5)), 40)
        is_verified = rng.random() < 0.005
        value = rng.randint(1, 10) * 10**16 if rng.random() < 0.2 else 0
        callers = rng.randint(1, 2)
    else:
        nonce = min(int(rng.lognormvariate(2.5, 1.5)), 5000)
        is_verified = rng.random() < 0.90
        value = rng.randint(1, 10) * 10**16 if rng.random() < 0.02 else 0
        callers = rng.randint(0, 9) if few_callers else rng.randint(10, 60)
    source = _pick(rng, FUND_MIX[label])
    name = rng.choice(NAMES_BENIGN) if kind == "benign" else ("Token" if kind == "token" else "Exploit")
    gas = 53_000 + 200 * len(runtime) + 22_100 * bp.constructor_filler + rng.randint(0, 5_000)
    is_verified = is_verified if verified is None else verified
    source = source if fund is None else fund
    c = SynthContract(
        address=contract_address(creator, nonce), creator=creator, nonce=nonce, label=label, kind=kind,
        blueprint=bp, runtime=runtime, creation=creation, block=block, tx_index=tx_index,
        timestamp=GENESIS_TIME + BLOCK_TIME * block, verified=is_verified, name=name if is_verified else None,
        fund=source, value=value, gas_used=gas, n_callers=callers if n_callers is None else n_callers,
    )
    return c, _funding_chain(rng, creator, source, block)


def generate_world(
    n: int = 2000,
    adversarial_fraction: float = 0.15,
    seed: int = 0,
    token_fraction: float = 0.0,
    few_caller_fraction: float = 0.0,
    start_block: int = 1000,
) -> SyntheticWorld:
    """`few_caller_fraction` of benign contracts get fewer than 10 distinct
    callers, so dataset building drops them along with the tokens."""
    rng = random.Random(seed)
    contracts, transfers = [], []
    block, tx_index = start_block, 0
    n_adv = round(n * adversarial_fraction)
    n_tok = round(n * token_fraction)
    kinds = ["adversarial"] * n_adv + ["token"] * n_tok + ["benign"] * (n - n_adv - n_tok)
    rng.shuffle(kinds)
    for kind in kinds:
        block += rng.choice((0, 1, 1, 2, 3))
        tx_index = tx_index + 1 if contracts and contracts[-1].block == block else 0
        few = kind != "adversarial" and rng.random() < few_caller_fraction
        c, t = make_contract(rng, kind, block, tx_index, few)
        contracts.append(c)
        transfers += t
    return SyntheticWorld(contracts, transfers, default_label_db(), seed)


def world_config_values() -> dict:
    """Endpoint settings that point a pipeline config at a synthetic world."""
    return {"rpc_url": RPC_URL, "explorer_url": EXPLORER_URL, "fourbyte_url": FOURBYTE_URL}


def world_http(world: SyntheticWorld) -> httpx.Client:
    return httpx.Client(transport=world.transport())
