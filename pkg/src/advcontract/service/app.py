"""FastAPI application: the analysis core behind POST /analyze."""

from __future__ import annotations

import httpx
from fastapi import FastAPI
from fastapi.concurrency import run_in_threadpool

from advcontract.ml.system import load_bundle
from advcontract.pipeline.config import PipelineConfig, build_context
from advcontract.pipeline.core import AnalysisContext, analyze_address, analyze_code, failed_report, parse_code
from advcontract.service.schemas import AnalyzeRequest, AnalyzeResponse, HealthResponse


def create_app(cfg: PipelineConfig, ctx: AnalysisContext | None = None, http: httpx.Client | None = None) -> FastAPI:
    if ctx is None:
        system = load_bundle(cfg.model) if cfg.model else None
        ctx = build_context(cfg, system=system, http=http)
    app = FastAPI(title="advcontract", version="1")
    app.state.ctx = ctx

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        s = ctx.system
        return HealthResponse(status="ok", model_loaded=s is not None, mode=cfg.mode,
                              selected_candidate=s.selected_candidate if s else None,
                              selected_meta=s.selected_meta if s else None)

    @app.post("/analyze", response_model=AnalyzeResponse, response_model_by_alias=True)
    async def analyze(req: AnalyzeRequest) -> dict:
        if req.address is not None:
            report = await run_in_threadpool(analyze_address, req.address, ctx)
        else:
            try:
                code = parse_code(req.bytecode)
            except ValueError as exc:
                return failed_report("request", f"ValueError: {exc}").to_dict()
            dep = req.deployment.model_dump(exclude_none=True) if req.deployment else None
            report = await run_in_threadpool(analyze_code, code, ctx, dep)
        return report.to_dict()

    return app
