"""HTTP service exposing the analysis operations.

Thin wrapper over the report builders: endpoints validate the request
shape, re-parse the document through the canonical parser, and return the
same report dicts the CLI prints. Domain errors map to 422 with a stable
error code.
"""

from __future__ import annotations

import json

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import LoopflowError
from ..network import NetworkDocument, load_document
from ..reports import (
    jsonsafe,
    run_basis,
    run_certify,
    run_node_demo,
    run_rate,
    run_solve,
    run_validate,
)
from .schemas import (
    BasisReport,
    CertifyRequest,
    DocumentIn,
    DocumentRequest,
    HcCertifyReport,
    HealthReport,
    NodeDemoReport,
    NodeDemoRequest,
    NrCertifyReport,
    RateReport,
    RateRequest,
    SolveReport,
    SolveRequest,
    ValidateReport,
)

DEMO_DOCUMENT = {
    "nodes": [{"id": 1, "inflow": 0.0}, {"id": 2, "inflow": 0.0}],
    "edges": [{"id": 1, "from": 1, "to": 2, "mu": 1.0}],
}


def _parse(document: DocumentIn) -> NetworkDocument:
    return load_document(json.dumps(document.as_document_dict()))


def _vec(values: list[float] | None) -> np.ndarray | None:
    return None if values is None else np.asarray(values, dtype=float)


def create_app() -> FastAPI:
    app = FastAPI(
        title="loopflow",
        version=__version__,
        description="Pipe-network loop solver, convergence certificates, and diagnostics.",
    )

    @app.exception_handler(LoopflowError)
    async def domain_error(request: Request, exc: LoopflowError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"error": exc.code, "message": str(exc)})

    @app.get("/health", response_model=HealthReport)
    async def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/validate", response_model=ValidateReport)
    async def validate_endpoint(req: DocumentRequest) -> dict:
        return run_validate(_parse(req.document))

    @app.post("/basis", response_model=BasisReport)
    async def basis_endpoint(req: DocumentRequest) -> dict:
        return run_basis(_parse(req.document))

    @app.post("/solve", response_model=SolveReport)
    async def solve_endpoint(req: SolveRequest) -> dict:
        report = run_solve(
            _parse(req.document),
            method=req.method,
            hc_mode=req.hc_mode,
            tol_residual=req.tol_residual,
            tol_step=req.tol_step,
            max_iters=req.max_iters,
            x0=_vec(req.x0),
        )
        return jsonsafe(report)

    @app.post("/certify", response_model=NrCertifyReport | HcCertifyReport)
    async def certify_endpoint(req: CertifyRequest) -> dict:
        return run_certify(
            _parse(req.document),
            method=req.method,
            basis_mode="face" if req.face_basis else "general",
            x0=_vec(req.x0),
        )

    @app.post("/rate", response_model=RateReport)
    async def rate_endpoint(req: RateRequest) -> dict:
        report = run_rate(
            _parse(req.document),
            tol_residual=req.tol_residual,
            tol_step=req.tol_step,
            max_iters=req.max_iters,
            hc_mode=req.hc_mode,
            x0=_vec(req.x0),
        )
        return jsonsafe(report)

    @app.post("/node-demo", response_model=NodeDemoReport)
    async def node_demo_endpoint(req: NodeDemoRequest) -> dict:
        if req.document is None:
            doc = load_document(json.dumps(DEMO_DOCUMENT))
        else:
            doc = _parse(req.document)
        report = run_node_demo(
            doc,
            p0=_vec(req.p0),
            tol_residual=req.tol_residual,
            tol_step=req.tol_step,
            max_iters=req.max_iters,
        )
        return jsonsafe(report)

    return app


app = create_app()
