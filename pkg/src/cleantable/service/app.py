"""FastAPI application exposing live training sessions and fusion helpers."""
from __future__ import annotations

import asyncio
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import ValidationError

from ..affordance import AffordanceNet, generate_dataset, train
from ..fusion import CommandLexicon
from ..scenario import ACTIONS, enumerate_states
from .models import (
    AdviceAck,
    AdvicePayload,
    ConfigUpdate,
    SessionConfig,
    SessionCreated,
    SessionSnapshot,
)
from .sessions import SessionManager


def create_app(
    net: Optional[AffordanceNet] = None,
    lexicon: Optional[CommandLexicon] = None,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="cleantable live trainer")
    manager = SessionManager(lexicon)
    app.state.manager = manager
    app.state.net = net

    def ensure_net() -> AffordanceNet:
        if app.state.net is None:
            app.state.net = train(generate_dataset())
        return app.state.net

    def get_session(session_id: str):
        try:
            return manager.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")

    @app.get("/states")
    def states():
        return {
            "count": len(enumerate_states()),
            "states": [s.token() for s in enumerate_states()],
            "actions": [a.value for a in ACTIONS],
        }

    # session endpoints are async so they run on the event loop, where the
    # per-session stepping task can be created and cancelled safely
    @app.post("/session", response_model=SessionCreated)
    async def create_session(config: SessionConfig):
        session_net = ensure_net() if config.use_affordances else None
        session = manager.create(config, session_net)
        return SessionCreated(session_id=session.session_id)

    @app.get("/session/{session_id}", response_model=SessionSnapshot)
    async def session_snapshot(session_id: str):
        return get_session(session_id).snapshot()

    @app.delete("/session/{session_id}")
    async def stop_session(session_id: str):
        get_session(session_id)
        manager.stop(session_id)
        return {"stopped": session_id}

    @app.websocket("/session/{session_id}/ws")
    async def session_ws(websocket: WebSocket, session_id: str):
        try:
            session = manager.get(session_id)
        except KeyError:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        queue = session.subscribe()

        async def forward_updates():
            while True:
                doc = await queue.get()
                await websocket.send_json(doc)

        sender = asyncio.create_task(forward_updates())
        try:
            while True:
                doc = await websocket.receive_json()
                kind = doc.get("kind")
                if kind == "adviceSubmit":
                    try:
                        payload = AdvicePayload.model_validate(doc.get("payload") or {})
                        ack = session.submit_advice(payload)
                    except ValidationError as exc:
                        ack = AdviceAck(accepted=False, reason=str(exc.errors()[0]["msg"]))
                    await websocket.send_json(ack.model_dump())
                elif kind == "configUpdate":
                    try:
                        update = ConfigUpdate.model_validate(doc)
                        echo = session.apply_config_update(update)
                        await websocket.send_json(echo.model_dump())
                    except ValidationError:
                        await websocket.send_json(
                            AdviceAck(accepted=False, reason="malformed configUpdate").model_dump()
                        )
                else:
                    await websocket.send_json(
                        AdviceAck(accepted=False, reason=f"unknown kind {kind!r}").model_dump()
                    )
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            session.unsubscribe(queue)

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        path = Path(ui_dir)
        if path.is_dir():
            app.mount("/ui", StaticFiles(directory=str(path), html=True), name="ui")

    return app
