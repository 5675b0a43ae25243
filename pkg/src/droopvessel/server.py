"""WebSocket session server.

One simulation session per connection at ``/ws``. Messages both ways are
newline-terminated JSON objects carried in WebSocket text frames; a malformed
message gets a ``{"type": "error"}`` reply and the session lives on. Frames
are published at a fixed wall-clock cadence (20 Hz) regardless of the
session's speed multiplier.
"""

from __future__ import annotations

import asyncio
import json
import time
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .session import FRAME_HZ, LiveSession


def create_app(ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="droopvessel session server")

    @app.websocket("/ws")
    async def ws_session(socket: WebSocket) -> None:
        await socket.accept()
        session = LiveSession()
        inbox: asyncio.Queue[str | None] = asyncio.Queue()

        async def reader() -> None:
            while True:
                try:
                    message = await socket.receive()
                except WebSocketDisconnect:
                    inbox.put_nowait(None)  # sentinel: peer is gone
                    return
                if message.get("type") == "websocket.disconnect":
                    inbox.put_nowait(None)
                    return
                text = message.get("text")
                if text is None:  # binary frames are not part of the protocol
                    inbox.put_nowait("\x00binary")
                else:
                    inbox.put_nowait(text)

        read_task = asyncio.create_task(reader())
        tick = 1.0 / FRAME_HZ
        last = time.monotonic()
        try:
            while True:
                while not inbox.empty():
                    raw = inbox.get_nowait()
                    if raw is None:
                        return
                    if raw == "\x00binary":
                        await _send(socket, {"type": "error", "detail": "binary frames not supported"})
                        continue
                    for reply in _handle_raw(session, raw):
                        await _send(socket, reply)
                now = time.monotonic()
                frame = session.advance(now - last)
                last = now
                if frame is not None:
                    await _send(socket, frame)
                await asyncio.sleep(tick)
        except WebSocketDisconnect:
            pass
        finally:
            read_task.cancel()

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def _handle_raw(session: LiveSession, raw: str) -> list[dict]:
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as exc:
        return [{"type": "error", "detail": f"not valid JSON: {exc}"}]
    return session.handle(msg)


async def _send(socket: WebSocket, msg: dict) -> None:
    await socket.send_text(json.dumps(msg) + "\n")


def serve(host: str, port: int, ui_dir: str | Path | None = None) -> None:
    """Run the server; raises OSError if the port is taken."""
    import socket as socketlib

    import uvicorn

    probe = socketlib.socket(socketlib.AF_INET, socketlib.SOCK_STREAM)
    probe.setsockopt(socketlib.SOL_SOCKET, socketlib.SO_REUSEADDR, 1)
    try:
        probe.bind((host, port))
    finally:
        probe.close()

    uvicorn.run(create_app(ui_dir), host=host, port=port, log_level="warning")
