"""Minimal async WebSocket test client speaking the wire protocol."""

from __future__ import annotations

import asyncio
import json
from typing import Optional

from websockets.asyncio.client import connect

from spacerace import protocol


class WsClient:
    def __init__(self, url: str):
        self.url = url
        self.ws = None
        self.seq = 0
        self.inbox: list[protocol.WireMessage] = []

    async def __aenter__(self) -> "WsClient":
        self.ws = await connect(self.url, open_timeout=10)
        return self

    async def __aexit__(self, *exc) -> None:
        await self.close()

    async def close(self) -> None:
        if self.ws is not None:
            await self.ws.close()
            self.ws = None

    async def send(self, type_name: str, payload: dict | None = None) -> None:
        self.seq += 1
        await self.ws.send(json.dumps(
            {"type": type_name, "seq": self.seq, "payload": payload or {}}))

    async def send_raw(self, raw: str | bytes) -> None:
        await self.ws.send(raw)

    async def recv(self, timeout: float = 5.0) -> protocol.WireMessage:
        raw = await asyncio.wait_for(self.ws.recv(), timeout)
        msg = protocol.decode_message(raw)
        self.inbox.append(msg)
        return msg

    async def expect(self, type_name: str, timeout: float = 5.0) -> protocol.WireMessage:
        """Receive until a message of the given type arrives (others are kept
        in the inbox for later inspection)."""
        deadline = asyncio.get_event_loop().time() + timeout
        while True:
            remaining = deadline - asyncio.get_event_loop().time()
            if remaining <= 0:
                raise TimeoutError(
                    f"no {type_name!r} within {timeout}s; "
                    f"saw {[m.type for m in self.inbox][-8:]}")
            msg = await self.recv(timeout=remaining)
            if msg.type == type_name:
                return msg

    def drain_inbox(self, type_name: Optional[str] = None) -> list[protocol.WireMessage]:
        if type_name is None:
            out, self.inbox = self.inbox, []
            return out
        out = [m for m in self.inbox if m.type == type_name]
        self.inbox = [m for m in self.inbox if m.type != type_name]
        return out


async def create_game_over_ws(url: str, config: dict, bank_doc: dict,
                              map_name: str | None = None) -> tuple[WsClient, str, str]:
    """Connect an admin, create a game, return (admin client, code, token)."""
    admin = WsClient(url)
    await admin.__aenter__()
    await admin.send("admin_create_game",
                     {"config": config, "bank": bank_doc,
                      **({"mapName": map_name} if map_name else {})})
    created = await admin.expect("game_created")
    return admin, created.payload.gameCode, created.payload.adminToken


async def join_player_ws(url: str, code: str, name: str, team: int) -> WsClient:
    client = WsClient(url)
    await client.__aenter__()
    await client.send("join", {"gameCode": code, "name": name})
    await client.expect("joined")
    await client.send("select_team", {"team": team})
    return client
