"""HTTP service exposing every command as a POST route.

The request and response bodies are the same wire formats the command
line tool reads and writes, so artifacts generated by `gen` can be
posted directly. Domain validation failures map to 422 with a
structured body; solver failures map to 500. Run locally with
`qcomp serve` or mount ``app`` under any ASGI server.
"""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import handlers
from .errors import QcompError, SolverError
from .schemas import (
    DeficiencyResponse,
    DiamondRequest,
    DualRequest,
    EnsembleFromMapRequest,
    EnsembleFromMapResponse,
    ErrorBody,
    ExpDeficiencyRequest,
    ExpDeficiencyResponse,
    GenRequest,
    PairRequest,
    PsuccRequest,
    PsuccResponse,
    Report,
    VerifyBody,
    VerifyRequest,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="qcomp",
        description=(
            "Diamond norms, guessing probabilities, and deficiency between "
            "quantum channels and statistical experiments, with certified "
            "semidefinite programming throughout."
        ),
        version="0.1.0",
    )

    @app.exception_handler(QcompError)
    async def _domain_error(request: Request, exc: QcompError) -> JSONResponse:
        status = 500 if isinstance(exc, SolverError) else 422
        body = ErrorBody(error=str(exc), kind=type(exc).__name__)
        return JSONResponse(status_code=status, content=body.model_dump())

    @app.get("/health")
    async def health() -> dict[str, str]:
        return {"status": "ok"}

    @app.post("/diamond", response_model=Report)
    async def diamond(req: DiamondRequest) -> Report:
        return handlers.diamond(req)

    @app.post("/dual", response_model=Report)
    async def dual(req: DualRequest) -> Report:
        return handlers.dual(req)

    @app.post("/psucc", response_model=PsuccResponse)
    async def psucc(req: PsuccRequest) -> PsuccResponse:
        return handlers.psucc(req)

    @app.post("/ensemble-from-map", response_model=EnsembleFromMapResponse)
    async def ensemble_from_map(req: EnsembleFromMapRequest) -> EnsembleFromMapResponse:
        return handlers.ensemble_from_map(req)

    @app.post("/deficiency", response_model=DeficiencyResponse)
    async def deficiency(req: PairRequest) -> DeficiencyResponse:
        return handlers.deficiency_cmd(req)

    @app.post("/lecam", response_model=Report)
    async def lecam(req: PairRequest) -> Report:
        return handlers.lecam(req)

    @app.post("/exp-deficiency", response_model=ExpDeficiencyResponse)
    async def exp_deficiency(req: ExpDeficiencyRequest) -> ExpDeficiencyResponse:
        return handlers.exp_deficiency(req)

    @app.post("/lecam-classical", response_model=Report)
    async def lecam_classical(req: ExpDeficiencyRequest) -> Report:
        return handlers.lecam_classical(req)

    @app.post("/verify", response_model=Report)
    async def verify(body: VerifyBody) -> Report:
        req = VerifyRequest(
            suite=body.suite, trials=body.trials, seed=body.seed, tol=body.tol
        )
        return handlers.verify_cmd(req, phi=body.phi, psi=body.psi)

    @app.post("/gen")
    async def gen(req: GenRequest) -> dict[str, Any]:
        return handlers.gen(req)

    return app


app = create_app()
