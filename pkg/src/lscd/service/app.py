"""FastAPI wiring for the campaign store.

Configuration comes from the environment: LSCD_DATA_DIR (campaign storage),
LSCD_OPERATOR_TOKEN (operator auth), LSCD_LISTEN (host:port for `lscd serve`).
Annotator endpoints authenticate with the per-annotator bearer token from the
campaign roster; operator endpoints with the operator token.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, Header, HTTPException, Request
from fastapi.staticfiles import StaticFiles

from . import schemas
from .store import CampaignStore, ServiceError

DEFAULT_DATA_DIR = "./campaign-data"


def _bearer(authorization: Optional[str]) -> str:
    if not authorization or not authorization.startswith("Bearer "):
        raise HTTPException(status_code=401, detail="missing bearer token")
    return authorization.removeprefix("Bearer ")


def create_app(data_dir: Optional[str] = None,
               operator_token: Optional[str] = None,
               static_dir: Optional[str] = None) -> FastAPI:
    store = CampaignStore(data_dir or os.environ.get("LSCD_DATA_DIR", DEFAULT_DATA_DIR))
    op_token = operator_token or os.environ.get("LSCD_OPERATOR_TOKEN", "")

    app = FastAPI(title="annotation campaign service", version="1")
    app.state.store = store

    def require_operator(authorization: Optional[str] = Header(None)) -> None:
        if not op_token:
            raise HTTPException(status_code=503, detail="operator token not configured")
        if _bearer(authorization) != op_token:
            raise HTTPException(status_code=401, detail="bad operator token")

    @app.exception_handler(ServiceError)
    async def _service_error(request: Request, exc: ServiceError):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=exc.status, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.post("/campaigns", response_model=schemas.CampaignCreated,
              dependencies=[Depends(require_operator)])
    def create_campaign(spec: schemas.CampaignSpec):
        camp = store.create_campaign(spec.model_dump())
        return schemas.CampaignCreated(
            id=camp.id,
            words=[schemas.WordStatus(**w) for w in store.word_statuses(camp.id)])

    @app.get("/campaigns/{cid}", response_model=schemas.CampaignStatus,
             dependencies=[Depends(require_operator)])
    def campaign_status(cid: str):
        store.get(cid)
        return schemas.CampaignStatus(
            id=cid, words=[schemas.WordStatus(**w) for w in store.word_statuses(cid)])

    @app.get("/campaigns/{cid}/annotators/{aid}/next",
             response_model=schemas.NextResponse)
    def next_item(cid: str, aid: str, authorization: Optional[str] = Header(None)):
        store.authenticate(cid, aid, _bearer(authorization))
        item = store.next_item(cid, aid)
        return schemas.NextResponse(
            item=schemas.QueueItem(**item) if item else None)

    @app.post("/campaigns/{cid}/judgments", response_model=schemas.JudgmentAck)
    def submit_judgment(cid: str, body: schemas.JudgmentIn,
                        authorization: Optional[str] = Header(None)):
        aid = store.annotator_for_token(cid, _bearer(authorization))
        if len(body.pair) != 2:
            raise HTTPException(status_code=400, detail="pair must have two node ids")
        if body.value not in (0, 1, 2, 3, 4):
            raise HTTPException(status_code=400, detail="value must be in 0..4")
        ack = store.submit_judgment(cid, aid, tuple(body.pair), body.value)
        return schemas.JudgmentAck(**ack)

    @app.post("/campaigns/{cid}/words/{word}/advance",
              response_model=schemas.AdvanceResult,
              dependencies=[Depends(require_operator)])
    def advance(cid: str, word: str):
        out = store.advance_round(cid, word)
        scores = out.pop("scores", None)
        return schemas.AdvanceResult(
            **out, scores=schemas.ScoresView(**scores) if scores else None)

    @app.get("/campaigns/{cid}/words/{word}/graph", response_model=schemas.GraphView,
             dependencies=[Depends(require_operator)])
    def graph_view(cid: str, word: str):
        return schemas.GraphView(**store.graph_view(cid, word))

    @app.get("/campaigns/{cid}/words/{word}/scores", response_model=schemas.ScoresView,
             dependencies=[Depends(require_operator)])
    def scores_view(cid: str, word: str):
        return schemas.ScoresView(**store.scores_view(cid, word))

    @app.post("/campaigns/{cid}/reassign", response_model=schemas.ReassignAck,
              dependencies=[Depends(require_operator)])
    def reassign(cid: str, body: schemas.ReassignIn):
        out = store.reassign(cid, body.word, tuple(body.pair),
                             body.from_annotator, body.to_annotator)
        return schemas.ReassignAck(**out)

    static = static_dir or os.environ.get("LSCD_STATIC_DIR")
    if static and Path(static).is_dir():
        app.mount("/", StaticFiles(directory=static, html=True), name="ui")

    return app
