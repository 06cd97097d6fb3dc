"""Game rooms and the registry that hosts them.

Each room owns one asyncio queue and one consumer task: every client
message (and internal tick) is admitted with a timestamp, enqueued, and
applied to the engine strictly in admission order. Connection handlers
never touch game state directly, so the engine sees a total order per game
and distinct games are fully isolated from each other.
"""

from __future__ import annotations

import asyncio
import hmac
import logging
import secrets
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .. import engine, grading, protocol
from ..questions import QuestionBank
from ..world import Direction, WorldMap
from . import storage

log = logging.getLogger("spacerace.server")

# Unambiguous code alphabet: uppercase alphanumerics minus 0/O/1/I.
CODE_ALPHABET = "23456789ABCDEFGHJKLMNPQRSTUVWXYZ"
CODE_LENGTH = 6

OUTBOUND_QUEUE_LIMIT = 2000

_CLOSE = object()  # writer sentinel: drain finished, close transport


def now_ms() -> int:
    return int(time.time() * 1000)


def generate_game_code(taken: set[str] | dict) -> str:
    while True:
        code = "".join(secrets.choice(CODE_ALPHABET) for _ in range(CODE_LENGTH))
        if code not in taken:
            return code


class Connection:
    """One client session over WebSocket or the TCP bot port."""

    _ids = iter(range(1, 1 << 62))

    def __init__(self) -> None:
        self.id = next(Connection._ids)
        self.role: protocol.SessionRole = protocol.Unbound()
        self.last_seq: Optional[int] = None
        self.out_seq = 0
        self.outbound: asyncio.Queue = asyncio.Queue(maxsize=OUTBOUND_QUEUE_LIMIT)
        self.room: Optional["GameRoom"] = None
        self.dead = False

    def send_doc(self, type_name: str, payload_doc: dict) -> None:
        """Queue one outbound message; drops the connection when the queue
        overflows (a stalled client must not stall the game)."""
        if self.dead:
            return
        self.out_seq += 1
        text = protocol.encode_envelope(type_name, self.out_seq, payload_doc)
        try:
            self.outbound.put_nowait(text)
        except asyncio.QueueFull:
            log.warning("connection %d outbound overflow, dropping", self.id)
            self.kill()

    def send_payload(self, type_name: str, payload: protocol._Payload) -> None:
        self.send_doc(type_name, payload.model_dump(mode="json", exclude_none=True))

    def send_error(self, code: str, message: str) -> None:
        self.send_doc("error", {"code": code, "message": message})

    def request_close(self) -> None:
        try:
            self.outbound.put_nowait(_CLOSE)
        except asyncio.QueueFull:
            self.kill()

    def kill(self) -> None:
        self.dead = True
        # Unblock the writer immediately.
        try:
            while True:
                self.outbound.get_nowait()
        except asyncio.QueueEmpty:
            pass
        try:
            self.outbound.put_nowait(_CLOSE)
        except asyncio.QueueFull:
            pass


@dataclass
class RoomInput:
    kind: str  # "msg" | "tick" | "gone"
    now: int
    conn: Optional[Connection] = None
    msg: Optional[protocol.WireMessage] = None


@dataclass
class GameRoom:
    code: str
    admin_token: str
    state: engine.GameState
    bank: QuestionBank
    world: WorldMap
    report_dir: Path
    inputs: asyncio.Queue = field(default_factory=asyncio.Queue)
    player_conns: dict[str, Connection] = field(default_factory=dict)
    admin_conns: set[Connection] = field(default_factory=set)
    last_activity: int = field(default_factory=now_ms)
    closed: bool = False
    report_path: Optional[Path] = None
    _tasks: list[asyncio.Task] = field(default_factory=list)

    def start(self) -> None:
        self._tasks.append(asyncio.create_task(self._consume(), name=f"room-{self.code}"))
        self._tasks.append(asyncio.create_task(self._ticker(), name=f"tick-{self.code}"))

    async def close(self) -> None:
        if self.closed:
            return
        self.closed = True
        await self.inputs.put(RoomInput(kind="stop", now=now_ms()))
        for t in self._tasks[1:]:
            t.cancel()
        for conn in list(self.player_conns.values()) + list(self.admin_conns):
            conn.request_close()

    def enqueue(self, item: RoomInput) -> None:
        self.last_activity = item.now
        self.inputs.put_nowait(item)

    async def _ticker(self) -> None:
        while not self.closed:
            await asyncio.sleep(1.0)
            if self.admin_conns:
                self.enqueue(RoomInput(kind="tick", now=now_ms()))

    async def _consume(self) -> None:
        while True:
            item = await self.inputs.get()
            if item.kind == "stop":
                break
            try:
                self._handle(item)
            except Exception:
                log.exception("room %s: error handling %s", self.code, item.kind)
                if item.conn is not None:
                    item.conn.send_error("internal_error", "input could not be processed")

    # --- input handling (synchronous; the consumer task is the only writer) ---

    def _handle(self, item: RoomInput) -> None:
        if item.kind == "tick":
            self._send_snapshot_to_admins()
            return
        if item.kind == "gone":
            self._client_gone(item.conn, item.now)
            return
        assert item.msg is not None and item.conn is not None
        try:
            self._handle_msg(item.conn, item.msg, item.now)
        except engine.EngineError as exc:
            item.conn.send_error(exc.code, str(exc))
        except grading.GradingError as exc:
            item.conn.send_error("grading_fault", f"{type(exc).__name__}: {exc}")

    def _handle_msg(self, conn: Connection, msg: protocol.WireMessage, now: int) -> None:
        t = msg.type
        pay = msg.payload
        if t == "join":
            self._join(conn, pay.name, now)
        elif t == "resume":
            self._resume(conn, pay.playerId, now)
        elif t == "select_team":
            pid = self._player_id(conn)
            events = engine.select_team(self.state, pid, pay.team, now)
            self._fan_out(events)
        elif t == "move":
            pid = self._player_id(conn)
            events = engine.handle_move(self.state, pid, Direction.from_wire(pay.dir), now)
            self._fan_out(events)
        elif t == "interact":
            pid = self._player_id(conn)
            events = engine.handle_interact(self.state, pid, now)
            self._fan_out(events)
        elif t == "answer":
            pid = self._player_id(conn)
            submission = protocol.submission_from_doc(pay.submission)
            events = engine.handle_answer(self.state, pid, pay.taskId, submission, now)
            self._fan_out(events)
            self._after_possible_completion(events, now)
        elif t == "cancel_question":
            pid = self._player_id(conn)
            events = engine.handle_cancel(self.state, pid, now)
            self._fan_out(events)
        elif t == "admin_start":
            events = engine.start_game(self.state, now)
            self._fan_out(events)
            self._send_snapshot_to_admins()
        elif t == "admin_end":
            report, events = engine.finalize(self.state, now, engine.REASON_ADMIN)
            self._fan_out(events)
            self._persist_and_send_report(report)
        else:  # pragma: no cover - dispatcher routes only room-scoped types here
            conn.send_error("unroutable", f"{t} not handled by a game room")

    def _player_id(self, conn: Connection) -> str:
        role = conn.role
        assert isinstance(role, protocol.PlayerRole)
        return role.player_id

    def _join(self, conn: Connection, name: str, now: int) -> None:
        if not isinstance(conn.role, protocol.Unbound):
            conn.send_error("rejected_role", "session already bound")
            return
        player_id, events = engine.join_player(self.state, name, now)
        conn.role = protocol.PlayerRole(game_code=self.code, player_id=player_id)
        conn.room = self
        self.player_conns[player_id] = conn
        conn.send_doc("joined", {
            "playerId": player_id, "gameCode": self.code,
            "teams": self.state.config.teams,
            "maxPlayersPerTeam": self.state.config.max_players_per_team,
            "resumed": False,
        })
        self._fan_out(events)

    def _resume(self, conn: Connection, player_id: str, now: int) -> None:
        if not isinstance(conn.role, protocol.Unbound):
            conn.send_error("rejected_role", "session already bound")
            return
        player = self.state.players.get(player_id)
        if player is None:
            conn.send_error("no_such_player", "unknown player token")
            return
        old = self.player_conns.get(player_id)
        if old is not None and old is not conn:
            old.request_close()
        conn.role = protocol.PlayerRole(game_code=self.code, player_id=player_id)
        conn.room = self
        self.player_conns[player_id] = conn
        events = engine.set_connected(self.state, player_id, True, now)
        conn.send_doc("joined", {
            "playerId": player_id, "gameCode": self.code,
            "teams": self.state.config.teams,
            "maxPlayersPerTeam": self.state.config.max_players_per_team,
            "resumed": True,
        })
        if self.state.phase == engine.PHASE_RUNNING and player.team is not None:
            conn.send_doc("game_started", self._game_started_doc(player.team))
            conn.send_doc("task_update", self._task_update_doc(player.team))
        elif self.state.phase == engine.PHASE_FINISHED:
            conn.send_doc("game_over", {
                "winnerTeam": self.state.winner_team,
                "endedAt": self.state.ended_at,
            })
        self._fan_out(events)

    def _client_gone(self, conn: Optional[Connection], now: int) -> None:
        if conn is None:
            return
        self.admin_conns.discard(conn)
        role = conn.role
        if isinstance(role, protocol.PlayerRole):
            if self.player_conns.get(role.player_id) is conn:
                del self.player_conns[role.player_id]
                try:
                    events = engine.set_connected(self.state, role.player_id, False, now)
                except engine.EngineError:
                    return
                self._fan_out(events)

    # --- event fan-out ---------------------------------------------------

    def _fan_out(self, events: list[engine.Event]) -> None:
        roster_changed = False
        for ev in events:
            if ev.kind in ("player_joined", "team_selected", "connection_changed"):
                roster_changed = True
            elif ev.kind == "game_started":
                for pid, conn in self.player_conns.items():
                    team = self.state.players[pid].team
                    if team is not None:
                        conn.send_doc("game_started", self._game_started_doc(team))
                self._send_snapshot_to_admins()
            elif ev.kind == "position_changed":
                self._broadcast("position_changed", ev.data)
            elif ev.kind == "question_presented":
                self._to_player(ev, "question", ev.data["question"])
            elif ev.kind == "question_cancelled":
                pass  # the client cancelled by its own action; no wire echo
            elif ev.kind == "cooldown_active":
                self._to_player(ev, "cooldown_active", ev.data)
            elif ev.kind == "answer_result":
                doc = {"taskId": ev.data["taskId"], "verdict": ev.data["verdict"]}
                if "cooldownUntil" in ev.data:
                    doc["cooldownUntil"] = ev.data["cooldownUntil"]
                self._to_player(ev, "answer_result", doc)
            elif ev.kind == "nothing_here":
                self._to_player(ev, "nothing_here", {})
            elif ev.kind == "task_already_completed":
                self._to_player(ev, "task_already_completed", ev.data)
            elif ev.kind == "task_update":
                team = ev.data["team"]
                for pid, conn in self.player_conns.items():
                    if self.state.players[pid].team == team:
                        conn.send_doc("task_update", ev.data)
                for conn in self.admin_conns:
                    conn.send_doc("task_update", ev.data)
            elif ev.kind == "game_over":
                self._broadcast("game_over", ev.data)
        if roster_changed:
            self._broadcast("lobby_update", self._lobby_doc())

    def _after_possible_completion(self, events: list[engine.Event], now: int) -> None:
        completed = any(ev.kind == "answer_result" and ev.data["verdict"] == "correct"
                        for ev in events)
        if completed:
            self._send_snapshot_to_admins()
        if self.state.phase == engine.PHASE_FINISHED and self.state.report is None:
            report, extra = engine.finalize(self.state, now, engine.REASON_NATURAL)
            self._fan_out(extra)
            self._persist_and_send_report(report)

    def _persist_and_send_report(self, report: engine.Report) -> None:
        doc = report.to_dict()
        if self.report_path is None:
            try:
                self.report_path = storage.persist_report(report, self.report_dir)
            except OSError as exc:
                log.error("room %s: report not persisted: %s", self.code, exc)
                for conn in self.admin_conns:
                    conn.send_error("io_failure", f"report kept in memory: {exc}")
        for conn in self.admin_conns:
            conn.send_doc("report", doc)

    def _broadcast(self, type_name: str, doc: dict) -> None:
        for conn in self.player_conns.values():
            conn.send_doc(type_name, doc)
        for conn in self.admin_conns:
            conn.send_doc(type_name, doc)

    def _to_player(self, ev: engine.Event, type_name: str, doc: dict) -> None:
        pid = ev.scope.removeprefix("player:")
        conn = self.player_conns.get(pid)
        if conn is not None:
            conn.send_doc(type_name, doc)

    def _send_snapshot_to_admins(self) -> None:
        if not self.admin_conns:
            return
        snap = engine.snapshot(self.state)
        for conn in self.admin_conns:
            conn.send_doc("snapshot", snap)

    # --- payload builders --------------------------------------------------

    def _game_started_doc(self, team: int) -> dict:
        st = self.state
        return {
            "startedAt": st.started_at,
            "team": team,
            "mapRef": st.config.map_ref,
            "map": st.world.to_doc(),
            "positions": {p.player_id: list(p.pos) for p in st.players.values() if p.pos},
            "tasks": [t.to_dict() for t in st.teams[team].tasks],
        }

    def _task_update_doc(self, team: int) -> dict:
        t = self.state.teams[team]
        return {
            "team": team,
            "completed": t.completed_count,
            "total": len(t.tasks),
            "energy": t.energy,
            "tasks": [task.to_dict() for task in t.tasks],
        }

    def _lobby_doc(self) -> dict:
        return {
            "phase": self.state.phase,
            "players": [
                {"playerId": p.player_id, "name": p.name,
                 "team": p.team, "connected": p.connected}
                for p in self.state.players.values()
            ],
        }


class GameRegistry:
    """All live rooms; bounded by maxConcurrentGames."""

    def __init__(self, bank_dir: Path, map_dir: Path, report_dir: Path,
                 max_games: int = 64, idle_timeout_ms: int = 3_600_000):
        self.rooms: dict[str, GameRoom] = {}
        self.bank_dir = bank_dir
        self.map_dir = map_dir
        self.report_dir = report_dir
        self.max_games = max_games
        self.idle_timeout_ms = idle_timeout_ms

    def create_hosted_game(self, conn: Connection,
                           pay: protocol.AdminCreateGamePayload) -> GameRoom:
        """Create a room from an admin_create_game payload and bind the admin.

        Raises StorageError / engine errors; the dispatcher converts them to
        error frames.
        """
        if len(self.rooms) >= self.max_games:
            raise storage.StorageError(
                "capacity_reached", f"server already hosts {self.max_games} games")
        if pay.bank is not None:
            bank = storage.load_inline_bank(pay.bank)
            bank_ref = f"inline:{bank.name}"
        elif pay.bankName is not None:
            bank = storage.load_bank_file(self.bank_dir, pay.bankName)
            bank_ref = pay.bankName
        else:
            raise storage.StorageError("bank_not_found", "bankName or inline bank required")
        map_ref, world_map = storage.load_map_file(self.map_dir, pay.mapName)

        code = generate_game_code(self.rooms)
        cfg = engine.GameConfig(
            teams=pay.config.teams,
            max_players_per_team=pay.config.maxPlayersPerTeam,
            tasks_per_team=pay.config.tasksPerTeam,
            cooldown_millis=pay.config.cooldownMillis,
            energy_per_task=pay.config.energyPerTask,
            rng_seed=pay.config.rngSeed if pay.config.rngSeed is not None
            else secrets.randbits(48),
            bank_ref=bank_ref, map_ref=map_ref, game_id=code,
        )
        state = engine.create_game(cfg, bank, world_map)
        room = GameRoom(code=code, admin_token=secrets.token_hex(16), state=state,
                        bank=bank, world=world_map, report_dir=self.report_dir)
        self.rooms[code] = room
        room.start()
        conn.role = protocol.AdminRole(game_code=code, token=room.admin_token)
        conn.room = room
        room.admin_conns.add(conn)
        conn.send_doc("game_created", {"gameCode": code, "adminToken": room.admin_token})
        log.info("game %s created (%s)", code, bank_ref)
        return room

    def subscribe_admin(self, conn: Connection, code: str, token: str) -> None:
        room = self.rooms.get(code)
        if room is None or not hmac.compare_digest(room.admin_token, token):
            conn.send_error("admin_auth_failed", "unknown game code or bad token")
            return
        conn.role = protocol.AdminRole(game_code=code, token=token)
        conn.room = room
        room.admin_conns.add(conn)
        room.enqueue(RoomInput(kind="tick", now=now_ms()))

    async def reap_idle(self) -> None:
        cutoff = now_ms() - self.idle_timeout_ms
        for code, room in list(self.rooms.items()):
            if room.last_activity < cutoff:
                log.info("reaping idle game %s", code)
                await room.close()
                del self.rooms[code]

    async def shutdown(self) -> None:
        for room in list(self.rooms.values()):
            await room.close()
        self.rooms.clear()
