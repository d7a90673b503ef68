from __future__ import annotations

import random

import pytest

from advcontract.fundsource import (
    AddressLabelDB,
    ExplorerFundingProvider,
    FixtureGraphProvider,
    FundSourceCategory,
    FundTracer,
    Transfer,
    format_fixture_graph,
    label_address,
    parse_fixture_graph,
    trace_fund_source,
    trace_fund_source_detailed,
)

CATS = ["Safe", "Anonymous", "Bridge", "Unknown"]


def addr(i: int) -> str:
    return "0x" + f"{i:040x}"


def oracle(deployer: str, edges: list[tuple[str, str, int, int, int]], labels: dict, max_depth: int) -> str:
    """Independent reference: sort all positive transfers once, first occurrence per fundee wins."""
    first = {}
    for a, b, blk, idx, val in sorted((e for e in edges if e[4] > 0), key=lambda e: (e[2], e[3], e[0])):
        first.setdefault(b, a)
    chain = [deployer]
    for _ in range(max_depth):
        nxt = first.get(chain[-1])
        if nxt is None or nxt in chain:
            return "Unknown"
        chain.append(nxt)
        cat = labels.get(nxt)
        if cat in ("Safe", "Anonymous", "Bridge"):
            return cat
    return "Unknown"


def random_graph(rng: random.Random):
    n = rng.randint(3, 40)
    nodes = [addr(rng.getrandbits(60) | 1) for _ in range(n)]
    edges = []
    for _ in range(rng.randint(n, 3 * n)):
        a, b = rng.sample(nodes, 2)
        edges.append((a, b, rng.randint(1, 50), rng.randint(0, 5), rng.choice([0, 1, 10**18])))
    # a few long chains ending in a labeled source
    for _ in range(rng.randint(0, 3)):
        chain = [rng.choice(nodes) for _ in range(rng.randint(2, 14))]
        for x, y in zip(chain[1:], chain):
            if x != y:
                edges.append((x, y, rng.randint(0, 3), 0, 1))
    labels = {a: rng.choice(CATS) for a in rng.sample(nodes, rng.randint(0, n // 3))}
    return nodes, edges, labels


def test_fifty_graphs_match_oracle():
    rng = random.Random(2024)
    checked = 0
    for _ in range(50):
        nodes, edges, labels = random_graph(rng)
        text = format_fixture_graph(Transfer(*e) for e in edges)
        provider = FixtureGraphProvider.from_text(text)
        db = AddressLabelDB((a, f"L{i}", c) for i, (a, c) in enumerate(sorted(labels.items())))
        for deployer in nodes:
            for depth in (1, 3, 10):
                provider.calls = 0
                got = trace_fund_source(deployer, provider, db, depth)
                assert got.value == oracle(deployer, edges, labels, depth)
                assert provider.calls <= depth
                checked += 1
    assert checked > 1000


def test_depth_one_hit():
    e = Transfer(addr(2), addr(1), 1, 0, 5)
    db = AddressLabelDB([(addr(2), "TornadoCash", "Anonymous")])
    assert trace_fund_source(addr(1), FixtureGraphProvider([e]), db) == FundSourceCategory.ANONYMOUS


def test_chain_to_exchange():
    edges = [Transfer(addr(3), addr(2), 1, 0, 1), Transfer(addr(4), addr(3), 1, 0, 1), Transfer(addr(9), addr(4), 1, 0, 1)]
    db = AddressLabelDB([(addr(9), "Binance", "Safe")])
    res = trace_fund_source_detailed(addr(2), FixtureGraphProvider(edges), db, 10)
    assert res.category == FundSourceCategory.SAFE and res.path == [addr(3), addr(4), addr(9)]


def chain(n: int) -> list[Transfer]:
    return [Transfer(addr(i + 1), addr(i), i, 0, 1) for i in range(1, n + 1)]


def test_depth_threshold():
    db = AddressLabelDB([(addr(12), "Src", "Safe")])
    # 11 unlabeled hops before the label: never reached at depth 10
    prov = FixtureGraphProvider(chain(11))
    assert trace_fund_source(addr(1), prov, db, 10) == FundSourceCategory.UNKNOWN
    assert trace_fund_source(addr(1), prov, db, 11) == FundSourceCategory.SAFE
    db10 = AddressLabelDB([(addr(11), "Src", "Safe")])
    assert trace_fund_source(addr(1), prov, db10, 10) == FundSourceCategory.SAFE


def test_cycle_terminates():
    edges = [Transfer(addr(2), addr(1), 1, 0, 1), Transfer(addr(1), addr(2), 1, 0, 1)]
    prov = FixtureGraphProvider(edges)
    res = trace_fund_source_detailed(addr(1), prov, AddressLabelDB(), 1000)
    assert res.category == FundSourceCategory.UNKNOWN and res.reason == "cycle"
    assert prov.calls == 2


def test_earliest_by_block_then_index_and_value():
    edges = [
        Transfer(addr(5), addr(1), 10, 3, 1),
        Transfer(addr(6), addr(1), 10, 2, 1),
        Transfer(addr(7), addr(1), 9, 9, 0),  # no value: ignored
    ]
    assert FixtureGraphProvider(edges).earliest_incoming_funder(addr(1)) == addr(6)


def test_unknown_label_continues():
    edges = [Transfer(addr(2), addr(1), 1, 0, 1), Transfer(addr(3), addr(2), 1, 0, 1)]
    db = AddressLabelDB([(addr(2), "SomeDex", "Unknown"), (addr(3), "Bridge", "Bridge")])
    assert trace_fund_source(addr(1), FixtureGraphProvider(edges), db) == FundSourceCategory.BRIDGE


def test_monotone_under_label_growth():
    rng = random.Random(5)
    for _ in range(20):
        nodes, edges, labels = random_graph(rng)
        prov = FixtureGraphProvider(Transfer(*e) for e in edges)
        small = AddressLabelDB((a, "x", c) for a, c in labels.items())
        extra = dict(labels)
        for a in rng.sample(nodes, min(5, len(nodes))):
            extra.setdefault(a, rng.choice(CATS))
        big = AddressLabelDB((a, "x", c) for a, c in extra.items())
        for d in nodes:
            before = trace_fund_source(d, prov, small)
            if before != FundSourceCategory.UNKNOWN:
                assert trace_fund_source(d, prov, big) != FundSourceCategory.UNKNOWN


class Failing:
    def earliest_incoming_funder(self, a):
        raise TimeoutError("explorer down")


def test_provider_failure_degrades():
    res = trace_fund_source_detailed(addr(1), Failing(), AddressLabelDB())
    assert res.category == FundSourceCategory.UNKNOWN and res.diagnostics


def test_tracer_cache():
    prov = FixtureGraphProvider([Transfer(addr(2), addr(1), 1, 0, 1)])
    t = FundTracer(prov, AddressLabelDB([(addr(2), "Binance", "Safe")]))
    t.trace(addr(1))
    t.trace(addr(1).upper().replace("0X", "0x"))
    assert prov.calls == 1


def test_label_lookup():
    tc = "0x12D66f87A04A9E220743712cE6d9bB1B5616B8Fc"
    db = AddressLabelDB([(tc, "TornadoCash", "Anonymous")])
    assert label_address(tc.lower(), db) == ("TornadoCash", FundSourceCategory.ANONYMOUS)
    assert label_address(tc, db) == label_address(tc.upper().replace("0X", "0x"), db)
    assert label_address(addr(1), db) is None


def test_label_db_text_round_trip():
    db = AddressLabelDB.from_text("# c\n0x" + "ab" * 20 + ",Kraken,safe\n")
    assert AddressLabelDB.from_text(db.dump()).items() == db.items()
    with pytest.raises(ValueError):
        AddressLabelDB.from_text("0x" + "ab" * 20 + ",X,Weird\n")


def test_fixture_graph_parse_errors():
    with pytest.raises(ValueError):
        parse_fixture_graph("nonsense\n")


class FakeExplorer:
    def __init__(self, txs, internal):
        self._t, self._i = txs, internal

    def transactions(self, a):
        return [t for t in self._t if t["to"] == a or t["from"] == a]

    def internal_transactions(self, a):
        return [t for t in self._i if t["to"] == a]


def test_explorer_provider_uses_internal_transfers():
    me = addr(1)
    txs = [
        {"from": me, "to": addr(8), "value": "5", "blockNumber": "1", "transactionIndex": "0"},
        {"from": addr(3), "to": me, "value": "5", "blockNumber": "20", "transactionIndex": "0"},
        {"from": addr(4), "to": me, "value": "5", "blockNumber": "9", "transactionIndex": "0", "isError": "1"},
    ]
    internal = [{"from": addr(5), "to": me, "value": "1", "blockNumber": "10"}]
    assert ExplorerFundingProvider(FakeExplorer(txs, internal)).earliest_incoming_funder(me) == addr(5)
    assert ExplorerFundingProvider(FakeExplorer(txs, internal), include_internal=False).earliest_incoming_funder(me) == addr(3)
