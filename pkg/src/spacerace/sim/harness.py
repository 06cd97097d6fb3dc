"""Networked bot harness: plays full games over real sockets and checks
engine invariants as observed on the wire.

Every bot is an independent WebSocket client. Within a team, task claims
are partitioned by authored index (task i belongs to bot i mod teamSize);
a bot only ever answers its own claims, cancelling presentations of a
teammate's task, so per-task attempt counts are seed-reproducible.
"""

from __future__ import annotations

import asyncio
import json
import math
import time
from dataclasses import dataclass, field
from typing import Optional

from websockets.asyncio.client import connect
from websockets.exceptions import ConnectionClosed

from .. import protocol, world
from .answers import (
    correct_submission_doc,
    first_attempt_correct,
    index_by_prompt,
    make_sim_bank,
    wrong_submission_doc,
)

COOLDOWN_MARGIN_MS = 80
POLL_FOREIGN_TASK_MS = 200
MOVE_PACE_MS = 105  # stays under the server's 10 moves / 1000 ms window


class SimError(Exception):
    pass


class ConnectFailure(SimError):
    pass


class SimTimeout(SimError):
    pass


class _GameOverSignal(Exception):
    """Raised inside a bot's task loop when game_over arrives mid-plan."""


@dataclass
class SimConfig:
    server_url: str = "ws://127.0.0.1:8000/ws"
    teams: int = 2
    players_per_team: int = 2
    tasks_per_team: int = 4
    accuracy: float = 1.0
    think_time_millis: int = 0
    rng_seed: int = 42
    games: int = 1
    cooldown_millis: int = 10_000
    energy_per_task: int = 1
    game_timeout_s: Optional[float] = None
    out_path: Optional[str] = None

    def timeout_s(self) -> float:
        if self.game_timeout_s is not None:
            return self.game_timeout_s
        # Termination bound: tasks x (cooldown + 2*think + path time), x3 margin.
        path_ms = (24 + 16) * MOVE_PACE_MS
        per_task = self.cooldown_millis + 2 * self.think_time_millis + path_ms
        return max(30.0, 3.0 * self.tasks_per_team * per_task / 1000.0)


@dataclass
class BotStats:
    team: int
    bot_index: int
    player_id: str = ""
    attempts: int = 0
    corrects: int = 0
    claims: int = 0
    claims_completed: int = 0


@dataclass
class Assertion:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class GameResult:
    game_index: int
    game_code: str
    winner_team: Optional[int]
    duration_ms: int
    messages_in: int
    messages_out: int
    latency_p50_ms: float
    latency_p99_ms: float
    latency_samples: int
    bots: list[BotStats]

    def to_dict(self) -> dict:
        return {
            "gameIndex": self.game_index,
            "gameCode": self.game_code,
            "winnerTeam": self.winner_team,
            "durationMillis": self.duration_ms,
            "messagesIn": self.messages_in,
            "messagesOut": self.messages_out,
            "latencyP50Millis": round(self.latency_p50_ms, 3),
            "latencyP99Millis": round(self.latency_p99_ms, 3),
            "latencySamples": self.latency_samples,
            "bots": [vars(b) for b in self.bots],
        }


@dataclass
class SimReport:
    config: dict
    games: list[GameResult]
    assertions: list[Assertion]

    @property
    def all_passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "games": [g.to_dict() for g in self.games],
            "assertions": [vars(a) for a in self.assertions],
            "allPassed": self.all_passed,
        }


def _now_ms() -> int:
    return int(time.time() * 1000)


def _percentile(samples: list[float], q: float) -> float:
    if not samples:
        return 0.0
    ordered = sorted(samples)
    k = max(0, min(len(ordered) - 1, math.ceil(q / 100 * len(ordered)) - 1))
    return ordered[k]


class _Client:
    """Shared transport: seq counting, transcript, filtered receive."""

    def __init__(self, url: str, label: str):
        self.url = url
        self.label = label
        self.ws = None
        self.seq = 0
        self.transcript: list[protocol.WireMessage] = []
        self.queue: asyncio.Queue = asyncio.Queue()
        self.sent = 0
        self.received = 0
        self.latencies_ms: list[float] = []
        self._pending_send: Optional[float] = None
        self.game_over_msg: Optional[protocol.WireMessage] = None
        self._recv_task: Optional[asyncio.Task] = None

    async def open(self) -> None:
        try:
            self.ws = await connect(self.url, open_timeout=10, max_queue=4096)
        except OSError as exc:
            raise ConnectFailure(f"{self.label}: cannot reach {self.url}: {exc}") from exc
        self._recv_task = asyncio.create_task(self._recv_loop(), name=f"recv-{self.label}")

    async def close(self) -> None:
        if self._recv_task:
            self._recv_task.cancel()
        if self.ws:
            await self.ws.close()

    async def _recv_loop(self) -> None:
        try:
            async for raw in self.ws:
                msg = protocol.decode_message(raw)
                self.received += 1
                self.transcript.append(msg)
                if self._pending_send is not None:
                    self.latencies_ms.append(
                        (time.perf_counter() - self._pending_send) * 1000.0)
                    self._pending_send = None
                if msg.type == "game_over":
                    self.game_over_msg = msg
                self.on_message(msg)
                await self.queue.put(msg)
        except (ConnectionClosed, asyncio.CancelledError):
            pass

    def on_message(self, msg: protocol.WireMessage) -> None:
        pass

    async def send(self, type_name: str, payload: dict | None = None,
                   measure: bool = False) -> None:
        self.seq += 1
        self.sent += 1
        if measure:
            self._pending_send = time.perf_counter()
        await self.ws.send(json.dumps(
            {"type": type_name, "seq": self.seq, "payload": payload or {}}))

    async def expect(self, types: set[str], pred=None, timeout: float = 30.0,
                     game_over_raises: bool = True) -> protocol.WireMessage:
        deadline = asyncio.get_event_loop().time() + timeout
        while True:
            remaining = deadline - asyncio.get_event_loop().time()
            if remaining <= 0:
                raise SimTimeout(
                    f"{self.label}: none of {sorted(types)} within {timeout}s; "
                    f"tail={[m.type for m in self.transcript[-6:]]}")
            msg = await asyncio.wait_for(self.queue.get(), remaining)
            if msg.type == "game_over" and game_over_raises and "game_over" not in types:
                raise _GameOverSignal()
            if msg.type == "error":
                raise SimError(f"{self.label}: server error "
                               f"{msg.payload.code}: {msg.payload.message}")
            if msg.type in types and (pred is None or pred(msg)):
                return msg


class BotClient(_Client):
    def __init__(self, url: str, game_code: str, cfg: SimConfig, game_index: int,
                 team: int, bot_index: int, bank_by_prompt: dict[str, dict]):
        super().__init__(url, label=f"bot-t{team}b{bot_index}")
        self.game_code = game_code
        self.cfg = cfg
        self.game_index = game_index
        self.stats = BotStats(team=team, bot_index=bot_index)
        self.bank_by_prompt = bank_by_prompt
        self.player_id = ""
        self.map: Optional[world.WorldMap] = None
        self.pos: Optional[tuple[int, int]] = None
        self.tasks: list = []
        self.completed_tasks: set[str] = set()

    def on_message(self, msg: protocol.WireMessage) -> None:
        if msg.type == "position_changed" and msg.payload.playerId == self.player_id:
            self.pos = tuple(msg.payload.pos)
        elif msg.type == "task_update":
            for t in msg.payload.tasks:
                if t.status == "completed":
                    self.completed_tasks.add(t.taskId)

    async def run(self) -> None:
        await self.open()
        await self.send("join", {"gameCode": self.game_code, "name": self.label})
        joined = await self.expect({"joined"})
        self.player_id = joined.payload.playerId
        self.stats.player_id = self.player_id
        await self.send("select_team", {"team": self.stats.team})
        started = await self.expect({"game_started"}, timeout=60)
        self.map = world.map_from_doc(started.payload.map.model_dump())
        self.pos = tuple(started.payload.positions[self.player_id])
        self.tasks = list(started.payload.tasks)

        team_size = self.cfg.players_per_team
        claims = [i for i in range(len(self.tasks)) if i % team_size == self.stats.bot_index]
        self.stats.claims = len(claims)
        try:
            for idx in claims:
                await self._do_task(idx)
                self.stats.claims_completed += 1
        except _GameOverSignal:
            pass
        if self.game_over_msg is None:
            await self.expect({"game_over"}, timeout=self.cfg.timeout_s(),
                              game_over_raises=False)

    async def _think(self) -> None:
        if self.cfg.think_time_millis:
            await asyncio.sleep(self.cfg.think_time_millis / 1000.0)

    async def _do_task(self, idx: int) -> None:
        task = self.tasks[idx]
        if task.taskId in self.completed_tasks:
            return
        await self._walk_to_station(task.stationId, task.taskId)
        first_correct = first_attempt_correct(
            self.cfg.rng_seed, self.game_index, self.stats.team,
            self.stats.bot_index, task.taskId, self.cfg.accuracy)
        attempt = 0
        while task.taskId not in self.completed_tasks:
            await self._think()
            await self.send("interact", measure=True)
            msg = await self.expect({"question", "cooldown_active", "nothing_here"})
            if msg.type == "nothing_here":
                if task.taskId in self.completed_tasks:
                    return
                await asyncio.sleep(POLL_FOREIGN_TASK_MS / 1000.0)
                continue
            if msg.type == "cooldown_active":
                await self._sleep_until(msg.payload.expiresAt)
                continue
            if msg.payload.taskId != task.taskId:
                # A teammate's pending task was served first; leave it alone.
                await self.send("cancel_question")
                await asyncio.sleep(POLL_FOREIGN_TASK_MS / 1000.0)
                continue
            qdoc = self.bank_by_prompt[msg.payload.prompt]
            attempt += 1
            answer_right = True if attempt > 1 else first_correct
            sub = (correct_submission_doc(qdoc, msg.payload) if answer_right
                   else wrong_submission_doc(qdoc, msg.payload))
            await self._think()
            await self.send("answer", {"taskId": task.taskId, "submission": sub},
                            measure=True)
            res = await self.expect({"answer_result", "task_already_completed"})
            if res.type == "task_already_completed":
                return
            self.stats.attempts += 1
            if res.payload.verdict == "correct":
                self.stats.corrects += 1
                return
            await self._sleep_until(res.payload.cooldownUntil)

    async def _walk_to_station(self, station_id: int, task_id: str) -> None:
        target = world.station_cell(self.map, station_id)
        path = world.shortest_path(self.map, self.pos, target)
        for step in path:
            if task_id in self.completed_tasks:
                return
            if world.reachable_station(self.map, self.pos) == station_id:
                return
            await self.send("move", {"dir": step.wire}, measure=True)
            await self.expect({"position_changed"},
                              pred=lambda m: m.payload.playerId == self.player_id)
            await asyncio.sleep(MOVE_PACE_MS / 1000.0)

    async def _sleep_until(self, wall_ms: int) -> None:
        delta = (wall_ms + COOLDOWN_MARGIN_MS - _now_ms()) / 1000.0
        if delta > 0:
            await asyncio.sleep(delta)


class AdminClient(_Client):
    def __init__(self, url: str, label: str = "admin"):
        super().__init__(url, label)
        self.snapshots: list = []

    def on_message(self, msg: protocol.WireMessage) -> None:
        if msg.type == "snapshot":
            self.snapshots.append(msg.payload)

    async def create_game(self, cfg: SimConfig, game_index: int, bank_doc: dict) -> str:
        await self.send("admin_create_game", {
            "config": {
                "teams": cfg.teams,
                "maxPlayersPerTeam": cfg.players_per_team,
                "tasksPerTeam": cfg.tasks_per_team,
                "cooldownMillis": cfg.cooldown_millis,
                "energyPerTask": cfg.energy_per_task,
                "rngSeed": cfg.rng_seed + game_index,
            },
            "bank": bank_doc,
        })
        created = await self.expect({"game_created"})
        return created.payload.gameCode

    async def wait_lobby_full(self, total: int) -> None:
        def full(msg) -> bool:
            players = msg.payload.players
            return len(players) == total and all(p.team is not None for p in players)
        await self.expect({"lobby_update"}, pred=full, timeout=60)

    async def start(self) -> None:
        await self.send("admin_start")

    async def wait_report(self, timeout: float):
        msg = await self.expect({"report"}, timeout=timeout, game_over_raises=False)
        return msg.payload


async def _run_one_game(cfg: SimConfig, game_index: int,
                        assertions: list[Assertion]) -> GameResult:
    bank_doc = make_sim_bank(cfg.rng_seed + game_index, cfg.tasks_per_team)
    by_prompt = index_by_prompt(bank_doc)

    admin = AdminClient(cfg.server_url, label=f"admin-g{game_index}")
    await admin.open()
    code = await admin.create_game(cfg, game_index, bank_doc)

    bots: list[BotClient] = []
    for i in range(cfg.teams * cfg.players_per_team):
        team = i % cfg.teams
        bot_index = i // cfg.teams
        bots.append(BotClient(cfg.server_url, code, cfg, game_index,
                              team, bot_index, by_prompt))

    t0 = time.perf_counter()
    runs = [asyncio.create_task(b.run(), name=b.label) for b in bots]
    try:
        await admin.wait_lobby_full(len(bots))
        await admin.start()
        await asyncio.wait_for(asyncio.gather(*runs), timeout=cfg.timeout_s())
        report = await admin.wait_report(timeout=10)
    except asyncio.TimeoutError as exc:
        for r in runs:
            r.cancel()
        raise SimTimeout(
            f"game {game_index} ({code}) not finished within {cfg.timeout_s():.0f}s") from exc
    finally:
        for b in bots:
            await b.close()
    duration_ms = int((time.perf_counter() - t0) * 1000)

    _check_game(cfg, game_index, code, bots, admin, report, assertions)

    latencies = [s for b in bots for s in b.latencies_ms]
    winner = bots[0].game_over_msg.payload.winnerTeam if bots[0].game_over_msg else None
    result = GameResult(
        game_index=game_index, game_code=code, winner_team=winner,
        duration_ms=duration_ms,
        messages_in=sum(b.received for b in bots) + admin.received,
        messages_out=sum(b.sent for b in bots) + admin.sent,
        latency_p50_ms=_percentile(latencies, 50),
        latency_p99_ms=_percentile(latencies, 99),
        latency_samples=len(latencies),
        bots=[b.stats for b in bots],
    )
    await admin.close()
    return result


def _check_game(cfg: SimConfig, game_index: int, code: str, bots: list[BotClient],
                admin: AdminClient, report, assertions: list[Assertion]) -> None:
    tag = f"g{game_index}:{code}"

    overs = [[m for m in b.transcript if m.type == "game_over"] for b in bots]
    assertions.append(Assertion(
        name=f"{tag}: exactly one game_over per bot",
        passed=all(len(o) == 1 for o in overs),
        detail=f"counts={[len(o) for o in overs]}"))
    winners = {o[0].payload.winnerTeam for o in overs if o}
    assertions.append(Assertion(
        name=f"{tag}: single consistent winner",
        passed=len(winners) == 1 and None not in winners,
        detail=f"winners={winners}"))

    monotone = True
    detail = ""
    for b in bots:
        last = -1
        for m in b.transcript:
            if m.type == "task_update" and m.payload.team == b.stats.team:
                if m.payload.completed < last:
                    monotone = False
                    detail = f"{b.label} saw completed drop {last}->{m.payload.completed}"
                last = m.payload.completed
    assertions.append(Assertion(
        name=f"{tag}: task_update completed counts monotone", passed=monotone,
        detail=detail))

    snap_ok = True
    detail = ""
    last_by_team: dict[int, int] = {}
    for snap in admin.snapshots:
        for t in snap.teams:
            if t.energy != cfg.energy_per_task * t.completed:
                snap_ok = False
                detail = f"energy law broken in snapshot: {t}"
            if t.completed < last_by_team.get(t.team, 0):
                snap_ok = False
                detail = f"snapshot completed count dropped for team {t.team}"
            last_by_team[t.team] = t.completed
    assertions.append(Assertion(
        name=f"{tag}: admin snapshots consistent", passed=snap_ok, detail=detail))

    report_winner = report.winnerTeam if report is not None else None
    assertions.append(Assertion(
        name=f"{tag}: report matches observed winner",
        passed=report is not None and {report_winner} == winners,
        detail=f"report={report_winner} observed={winners}"))

    if len(winners) == 1 and None not in winners:
        winner = next(iter(winners))
        full = True
        detail = ""
        for b in bots:
            if b.stats.team != winner:
                continue
            updates = [m.payload for m in b.transcript
                       if m.type == "task_update" and m.payload.team == winner]
            if not updates or updates[-1].completed != updates[-1].total:
                full = False
                detail = f"{b.label} last update {updates[-1] if updates else None}"
        assertions.append(Assertion(
            name=f"{tag}: winning team observed all tasks completed",
            passed=full, detail=detail))


async def _run(cfg: SimConfig) -> SimReport:
    assertions: list[Assertion] = []
    games: list[GameResult] = []
    for g in range(cfg.games):
        games.append(await _run_one_game(cfg, g, assertions))
    return SimReport(config=vars(cfg).copy(), games=games, assertions=assertions)


def run_simulation(cfg: SimConfig) -> SimReport:
    """Run the configured number of games sequentially; raises ConnectFailure
    or SimTimeout, returns the aggregated report otherwise."""
    report = asyncio.run(_run(cfg))
    if cfg.out_path:
        with open(cfg.out_path, "w", encoding="utf-8") as f:
            json.dump(report.to_dict(), f, indent=2)
            f.write("\n")
    return report
