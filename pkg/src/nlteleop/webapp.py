"""HTTP/WebSocket gateway over a running Session.

Kept separate from the session machinery so the core stack can be used
without the web dependencies imported.
"""

import asyncio
import queue
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .service import (
    BackpressureError,
    STREAM_MAX_HZ,
    Session,
    SessionClosedError,
    SessionEvent,
)


class CommandBody(BaseModel):
    text: str


def create_app(session: Session) -> FastAPI:
    app = FastAPI(title="nlteleop gateway")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.session = session

    @app.post("/api/command")
    def post_command(body: CommandBody):
        try:
            command_id = session.submit_command(body.text)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except BackpressureError as exc:
            raise HTTPException(status_code=503, detail=str(exc))
        except SessionClosedError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"command_id": command_id}

    @app.get("/api/state")
    def get_state():
        return session.state_snapshot()

    @app.get("/api/metrics")
    def get_metrics():
        return session.metrics()

    @app.websocket("/api/stream")
    async def stream(ws: WebSocket):
        await ws.accept()
        events: "queue.Queue[SessionEvent]" = queue.Queue()
        remove = session.add_listener(events.put)
        tick = 1.0 / STREAM_MAX_HZ
        try:
            while True:
                while True:
                    try:
                        event = events.get_nowait()
                    except queue.Empty:
                        break
                    await ws.send_json({"type": "event", "event": event.to_json_dict()})
                snapshot = session.state_snapshot()
                await ws.send_json(
                    {
                        "type": "pose",
                        "pose": snapshot["pose"],
                        "yaw_deg": snapshot["yaw_deg"],
                        "busy": snapshot["busy"],
                    }
                )
                await asyncio.sleep(tick)
        except WebSocketDisconnect:
            pass
        finally:
            remove()

    return app


def serve(
    session: Session,
    host: str = "127.0.0.1",
    port: int = 8000,
    console_dir: Optional[Union[str, Path]] = None,
) -> None:
    """Run the gateway under uvicorn (blocking)."""
    import uvicorn

    app = create_app(session)
    if console_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(console_dir), html=True), name="console")
    uvicorn.run(app, host=host, port=port, log_level="warning")
