"""FastAPI application exposing POST /score and GET /health.

One model instance serves all clients: scoring requests are serialized
through a lock, so concurrent callers queue rather than contend for the
model. HTTP semantics: 400 malformed request, 413 oversized batch, 500
model failure, 503 while the model is still loading.
"""

from __future__ import annotations

import threading
from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .backend import ScoringBackend, build_backend
from .config import ServiceConfig


class PairIn(BaseModel):
    premise: str
    hypothesis: str


class ScoreRequest(BaseModel):
    pairs: list[PairIn]


class ScoreRow(BaseModel):
    entailment: float
    neutral: float
    contradiction: float


class ScoreResponse(BaseModel):
    scores: list[ScoreRow]


def create_app(
    config: ServiceConfig | None = None,
    backend: ScoringBackend | None = None,
    loader=None,
) -> FastAPI:
    """Build the service; `backend` injects a ready instance (used in tests),
    otherwise the model loads in a background thread after startup."""
    config = config or ServiceConfig()
    state = {"backend": backend, "error": None, "lock": threading.Lock()}

    def _load():
        try:
            state["backend"] = (loader or (lambda: build_backend(config)))()
        except Exception as exc:  # surfaced through /health as 503
            state["error"] = str(exc)

    @asynccontextmanager
    async def _lifespan(app: FastAPI):
        if state["backend"] is None:
            threading.Thread(target=_load, daemon=True).start()
        yield

    app = FastAPI(title="nli-service", lifespan=_lifespan)

    @app.exception_handler(RequestValidationError)
    def _bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/health")
    def health():
        if state["backend"] is None:
            detail = state["error"] or "model is loading"
            raise HTTPException(status_code=503, detail=detail)
        return {"status": "ok", "model": state["backend"].model_id}

    @app.post("/score", response_model=ScoreResponse)
    def score(request: ScoreRequest):
        if len(request.pairs) > config.max_batch_size:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(request.pairs)} exceeds limit {config.max_batch_size}",
            )
        if state["backend"] is None:
            raise HTTPException(status_code=503, detail=state["error"] or "model is loading")
        if not request.pairs:
            return ScoreResponse(scores=[])
        pairs = [(p.premise, p.hypothesis) for p in request.pairs]
        try:
            with state["lock"]:
                rows = state["backend"].score(pairs)
        except Exception as exc:
            raise HTTPException(status_code=500, detail=f"model failure: {exc}") from exc
        if len(rows) != len(pairs):
            raise HTTPException(
                status_code=500,
                detail=f"model returned {len(rows)} rows for {len(pairs)} pairs",
            )
        return ScoreResponse(
            scores=[
                ScoreRow(entailment=e, neutral=n, contradiction=c) for e, n, c in rows
            ]
        )

    return app
