"""Request and response models of the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator


class DeploymentContext(BaseModel):
    contract_address: str | None = None
    creator_address: str | None = None
    tx_hash: str | None = None
    block_number: int = 0
    tx_index: int = 0
    block_timestamp: int = 0
    value: int = 0
    gas_used: int = 0
    nonce: int = 0
    verified: bool | None = None
    fund_source: str | None = None


class AnalyzeRequest(BaseModel):
    address: str | None = Field(None, description="analyze a deployed contract by address")
    bytecode: str | None = Field(None, description="hex creation or runtime bytecode")
    deployment: DeploymentContext | None = None

    @model_validator(mode="after")
    def one_target(self) -> "AnalyzeRequest":
        if (self.address is None) == (self.bytecode is None):
            raise ValueError("give exactly one of address or bytecode")
        return self


class PSCFTStats(BaseModel):
    token_count: int
    function_count: int


class PredictionOut(BaseModel):
    label_pred: int
    p_pred: float
    p_classifier: float
    p_transformer: float


class AnalyzeResponse(BaseModel):
    schema_: str = Field(alias="schema", serialization_alias="schema")
    contract_id: str
    block_number: int | None = None
    tx_index: int | None = None
    deployment: dict | None = None
    implementation: dict | None = None
    fund_source: str | None = None
    fund_path: list[str] = []
    pscft: PSCFTStats
    prediction: PredictionOut | None = None
    timings: dict[str, float]
    wall_s: float
    diagnostics: list[str]
    error: str | None = None
    exit_code: int


class HealthResponse(BaseModel):
    status: str
    model_loaded: bool
    selected_candidate: str | None = None
    selected_meta: str | None = None
    mode: str
