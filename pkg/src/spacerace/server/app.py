"""FastAPI application: WebSocket endpoint, optional TCP bot port, static client."""

from __future__ import annotations

import asyncio
import logging
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import protocol
from . import storage
from .rooms import _CLOSE, Connection, GameRegistry, RoomInput, now_ms

log = logging.getLogger("spacerace.server")

REAP_INTERVAL_S = 30.0
TCP_LINE_LIMIT = 1 << 20


@dataclass
class ServerSettings:
    host: str = "127.0.0.1"
    port: int = 8000
    bank_dir: Path = Path("banks")
    map_dir: Path = Path("maps")
    report_dir: Path = Path("reports")
    max_games: int = 64
    idle_timeout_ms: int = 3_600_000
    bot_tcp_port: Optional[int] = None
    static_dir: Optional[Path] = None
    extra: dict = field(default_factory=dict)


def _prepare_dirs(settings: ServerSettings) -> None:
    for d in (settings.bank_dir, settings.map_dir, settings.report_dir):
        d.mkdir(parents=True, exist_ok=True)
        probe = d / ".write-probe"
        try:
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            raise RuntimeError(f"directory {d} is not writable: {exc}") from exc


async def dispatch(registry: GameRegistry, conn: Connection, raw: str) -> bool:
    """Decode, check legality, and route one inbound message.

    Returns False when the connection must be closed (unparseable bytes).
    """
    now = now_ms()
    try:
        msg = protocol.decode_message(raw)
    except protocol.NotJson as exc:
        conn.send_error("not_json", str(exc))
        conn.request_close()
        return False
    except protocol.UnknownType as exc:
        conn.send_error("unknown_type", str(exc))
        return True
    except protocol.SchemaViolation as exc:
        conn.send_error("schema_violation", str(exc))
        return True

    phase_hint = conn.room.state.phase if conn.room is not None else None
    reason = protocol.legal_in_session(conn.role, phase_hint, msg, conn.last_seq)
    if reason == "seq":
        conn.send_error("rejected_seq", f"seq {msg.seq} not above {conn.last_seq}")
        return True
    conn.last_seq = msg.seq
    if reason is not None:
        conn.send_error(f"rejected_{reason}", f"{msg.type} not allowed ({reason})")
        return True

    t = msg.type
    if t == "admin_create_game":
        try:
            registry.create_hosted_game(conn, msg.payload)
        except storage.StorageError as exc:
            conn.send_error(exc.code, str(exc))
        except Exception as exc:  # engine ConfigInvalid/BankTooSmall, bad bank files
            code = getattr(exc, "code", "create_failed")
            conn.send_error(code, str(exc))
        return True
    if t == "admin_subscribe":
        registry.subscribe_admin(conn, msg.payload.gameCode, msg.payload.adminToken)
        return True
    if t == "admin_load_bank":
        try:
            bank = storage.load_inline_bank(msg.payload.bank)
            storage.save_bank_file(registry.bank_dir, msg.payload.name, bank)
        except (storage.StorageError, Exception) as exc:
            code = getattr(exc, "code", "invalid_bank")
            conn.send_error(code if isinstance(code, str) else "invalid_bank", str(exc))
        return True
    if t in ("join", "resume"):
        room = registry.rooms.get(msg.payload.gameCode)
        if room is None or room.closed:
            conn.send_error("game_not_found", f"no game {msg.payload.gameCode!r}")
            return True
        room.enqueue(RoomInput(kind="msg", now=now, conn=conn, msg=msg))
        return True

    room = conn.room
    if room is None or room.closed:
        conn.send_error("rejected_role", "session not bound to a game")
        return True
    room.enqueue(RoomInput(kind="msg", now=now, conn=conn, msg=msg))
    return True


def _notify_gone(conn: Connection) -> None:
    if conn.room is not None and not conn.room.closed:
        conn.room.enqueue(RoomInput(kind="gone", now=now_ms(), conn=conn))


async def _ws_writer(ws: WebSocket, conn: Connection) -> None:
    while True:
        item = await conn.outbound.get()
        if item is _CLOSE:
            try:
                await ws.close()
            except Exception:
                pass
            return
        await ws.send_text(item)


async def _tcp_client(registry: GameRegistry, reader: asyncio.StreamReader,
                      writer: asyncio.StreamWriter) -> None:
    conn = Connection()

    async def drain_outbound() -> None:
        while True:
            item = await conn.outbound.get()
            if item is _CLOSE:
                writer.close()
                return
            writer.write(item.encode("utf-8") + b"\n")
            await writer.drain()

    out_task = asyncio.create_task(drain_outbound())
    try:
        while True:
            line = await reader.readline()
            if not line:
                break
            if len(line) > TCP_LINE_LIMIT:
                conn.send_error("not_json", "line too long")
                break
            text = line.decode("utf-8", errors="replace").strip()
            if not text:
                continue
            if not await dispatch(registry, conn, text):
                break
    except (ConnectionResetError, asyncio.IncompleteReadError):
        pass
    finally:
        conn.dead = True
        _notify_gone(conn)
        out_task.cancel()
        try:
            writer.close()
        except Exception:
            pass


def create_app(settings: ServerSettings | None = None) -> FastAPI:
    settings = settings or ServerSettings()
    _prepare_dirs(settings)
    registry = GameRegistry(
        bank_dir=settings.bank_dir, map_dir=settings.map_dir,
        report_dir=settings.report_dir, max_games=settings.max_games,
        idle_timeout_ms=settings.idle_timeout_ms)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        tcp_server = None
        if settings.bot_tcp_port is not None:
            tcp_server = await asyncio.start_server(
                lambda r, w: _tcp_client(registry, r, w),
                host=settings.host, port=settings.bot_tcp_port,
                limit=TCP_LINE_LIMIT)
            log.info("TCP bot port listening on %s:%d", settings.host, settings.bot_tcp_port)

        async def reaper() -> None:
            while True:
                await asyncio.sleep(REAP_INTERVAL_S)
                await registry.reap_idle()

        reap_task = asyncio.create_task(reaper())
        try:
            yield
        finally:
            reap_task.cancel()
            if tcp_server is not None:
                tcp_server.close()
                await tcp_server.wait_closed()
            await registry.shutdown()

    app = FastAPI(title="spacerace server", lifespan=lifespan)
    app.state.registry = registry
    app.state.settings = settings

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        conn = Connection()
        writer = asyncio.create_task(_ws_writer(ws, conn))
        try:
            while True:
                raw = await ws.receive_text()
                if not await dispatch(registry, conn, raw):
                    break
        except WebSocketDisconnect:
            pass
        except Exception as exc:
            log.debug("ws connection %d dropped: %s", conn.id, exc)
        finally:
            conn.dead = True
            _notify_gone(conn)
            await asyncio.sleep(0)  # let queued error frames flush
            writer.cancel()

    @app.get("/healthz")
    async def healthz() -> JSONResponse:
        return JSONResponse({
            "ok": True,
            "games": len(registry.rooms),
            "maxGames": registry.max_games,
        })

    static = settings.static_dir
    if static is not None and static.is_dir():
        index = static / "index.html"

        @app.get("/play")
        @app.get("/admin")
        async def client_routes() -> FileResponse:
            return FileResponse(index)

        app.mount("/", StaticFiles(directory=static, html=True), name="client")
    else:
        @app.get("/")
        async def root() -> JSONResponse:
            return JSONResponse({
                "service": "spacerace",
                "websocket": "/ws",
                "hint": "build the browser client (frontend/) and pass --static",
            })

    return app
