"""Deployer fund-source tracing and categorisation."""

from advcontract.fundsource.providers import (
    ExplorerFundingProvider,
    FixtureGraphProvider,
    Transfer,
    format_fixture_graph,
    parse_fixture_graph,
)
from advcontract.fundsource.trace import (
    DEFAULT_MAX_DEPTH,
    FundTracer,
    TraceResult,
    trace_fund_source,
    trace_fund_source_detailed,
)
from advcontract.labels import AddressLabelDB, FundSourceCategory, label_address

__all__ = [
    "DEFAULT_MAX_DEPTH",
    "AddressLabelDB",
    "ExplorerFundingProvider",
    "FixtureGraphProvider",
    "FundSourceCategory",
    "FundTracer",
    "TraceResult",
    "Transfer",
    "format_fixture_graph",
    "label_address",
    "parse_fixture_graph",
    "trace_fund_source",
    "trace_fund_source_detailed",
]
