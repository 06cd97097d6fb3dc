"""Authoritative game state machine.

One game = lobby, team selection, a shared task race, and a final report.
Every operation takes the current time as an explicit millisecond integer;
the engine never reads a clock and never draws from an unseeded RNG, so a
game is fully replayable from its config plus the ordered input record.

Operations mutate the passed GameState in place and return the events they
emitted. Events carry a routing scope ("game", "team:N" or "player:ID")
that the transport layer uses for fan-out; they are also appended to the
state's event log, from which the post-game report is assembled.

Callers must apply operations for one game strictly sequentially; distinct
games are independent.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Any

from . import grading
from .questions import Question, QuestionBank, present_question
from .world import Cell, Direction, WorldMap, apply_move, reachable_station

PHASE_LOBBY = "lobby"
PHASE_RUNNING = "running"
PHASE_FINISHED = "finished"

REASON_NATURAL = "natural"
REASON_ADMIN = "admin"

MAX_TEAMS = 4
MAX_PLAYERS_PER_TEAM = 10

MOVE_WINDOW_MILLIS = 1000
MOVE_WINDOW_LIMIT = 10

TASK_PENDING = "pending"
TASK_COMPLETED = "completed"


class EngineError(Exception):
    """Base class; ``code`` is the stable wire-facing error identifier."""

    code = "engine_error"


class ConfigInvalid(EngineError):
    code = "config_invalid"


class BankTooSmall(EngineError):
    code = "bank_too_small"


class GameNotJoinable(EngineError):
    code = "game_not_joinable"


class GameFull(EngineError):
    code = "game_full"


class TeamFull(EngineError):
    code = "team_full"


class NoSuchTeam(EngineError):
    code = "no_such_team"


class WrongPhase(EngineError):
    code = "wrong_phase"


class NotEnoughPlayers(EngineError):
    code = "not_enough_players"


class UnassignedPlayers(EngineError):
    code = "unassigned_players"


class NoSuchPlayer(EngineError):
    code = "no_such_player"


class NoActivePresentation(EngineError):
    code = "no_active_presentation"


@dataclass
class GameConfig:
    teams: int
    max_players_per_team: int
    tasks_per_team: int
    cooldown_millis: int = 10000
    energy_per_task: int = 1
    rng_seed: int = 0
    bank_ref: str = ""
    map_ref: str = ""
    game_id: str = ""

    def to_dict(self) -> dict:
        return {
            "gameId": self.game_id,
            "teams": self.teams,
            "maxPlayersPerTeam": self.max_players_per_team,
            "tasksPerTeam": self.tasks_per_team,
            "cooldownMillis": self.cooldown_millis,
            "energyPerTask": self.energy_per_task,
            "rngSeed": self.rng_seed,
            "bankRef": self.bank_ref,
            "mapRef": self.map_ref,
        }


@dataclass
class Task:
    task_id: str
    question_id: str
    station_id: int
    status: str = TASK_PENDING
    completed_by: str | None = None
    completed_at: int | None = None

    def to_dict(self, with_question_id: bool = False) -> dict:
        out: dict = {"taskId": self.task_id, "stationId": self.station_id, "status": self.status}
        if with_question_id:
            out["questionId"] = self.question_id
        if self.status == TASK_COMPLETED:
            out["completedBy"] = self.completed_by
            out["completedAtMillis"] = self.completed_at
        return out


@dataclass
class PlayerState:
    player_id: str
    name: str
    team: int | None = None
    pos: Cell | None = None
    connected: bool = True


@dataclass
class TeamState:
    tasks: list[Task]
    energy: int = 0

    @property
    def completed_count(self) -> int:
        return sum(1 for t in self.tasks if t.status == TASK_COMPLETED)


@dataclass
class Presentation:
    task_id: str
    question_id: str
    token_map: dict[str, int]
    presented_at: int


@dataclass
class Event:
    kind: str
    at: int
    scope: str  # "game" | "team:N" | "player:ID"
    data: dict

    def to_dict(self) -> dict:
        return {"kind": self.kind, "at": self.at, "scope": self.scope, "data": self.data}


@dataclass(frozen=True)
class Report:
    game_id: str
    config: dict
    reason: str
    ended_at: int
    winner_team: int | None
    finish_order: tuple[dict, ...]
    per_task: tuple[dict, ...]
    per_player: tuple[dict, ...]
    event_digest: str

    def to_dict(self) -> dict:
        return {
            "gameId": self.game_id,
            "config": self.config,
            "reason": self.reason,
            "endedAtMillis": self.ended_at,
            "winnerTeam": self.winner_team,
            "finishOrder": list(self.finish_order),
            "perTask": list(self.per_task),
            "perPlayer": list(self.per_player),
            "eventLogDigest": self.event_digest,
        }


def report_bytes(report: Report) -> bytes:
    """Canonical report serialization (what gets persisted)."""
    return (json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n").encode("utf-8")


@dataclass
class GameState:
    config: GameConfig
    bank: QuestionBank
    world: WorldMap
    phase: str = PHASE_LOBBY
    started_at: int | None = None
    ended_at: int | None = None
    winner_team: int | None = None
    finalize_reason: str | None = None
    players: dict[str, PlayerState] = field(default_factory=dict)
    teams: list[TeamState] = field(default_factory=list)
    cooldowns: dict[tuple[str, str], int] = field(default_factory=dict)
    presentations: dict[str, Presentation] = field(default_factory=dict)
    event_log: list[Event] = field(default_factory=list)
    move_windows: dict[str, list[int]] = field(default_factory=dict)
    join_count: int = 0
    report: Report | None = None

    def question_by_id(self, qid: str) -> Question:
        for q in self.bank.questions:
            if q.id == qid:
                return q
        raise KeyError(f"question {qid!r} not in bank")

    def team_of(self, player_id: str) -> int:
        team = self.players[player_id].team
        assert team is not None
        return team


def _emit(state: GameState, kind: str, scope: str, at: int, data: dict) -> Event:
    ev = Event(kind=kind, at=at, scope=scope, data=data)
    state.event_log.append(ev)
    return ev


def _require_phase(state: GameState, phase: str) -> None:
    if state.phase != phase:
        raise WrongPhase(f"operation requires phase {phase}, game is {state.phase}")


def _require_player(state: GameState, player_id: str) -> PlayerState:
    p = state.players.get(player_id)
    if p is None:
        raise NoSuchPlayer(f"no player {player_id!r}")
    return p


def create_game(config: GameConfig, bank: QuestionBank, world: WorldMap) -> GameState:
    """Build a fresh lobby-phase game.

    Task lists are sampled without replacement from the bank with the
    config seed; every team receives the identical ordered question list,
    with task i bound to station index (i mod station count).
    """
    if not (1 <= config.teams <= MAX_TEAMS):
        raise ConfigInvalid(f"teams must be 1..{MAX_TEAMS}, got {config.teams}")
    if not (1 <= config.max_players_per_team <= MAX_PLAYERS_PER_TEAM):
        raise ConfigInvalid(
            f"maxPlayersPerTeam must be 1..{MAX_PLAYERS_PER_TEAM}, got {config.max_players_per_team}")
    if config.tasks_per_team < 1:
        raise ConfigInvalid("tasksPerTeam must be >= 1")
    if config.cooldown_millis < 0:
        raise ConfigInvalid("cooldownMillis must be >= 0")
    if config.energy_per_task < 1:
        raise ConfigInvalid("energyPerTask must be >= 1")
    if config.tasks_per_team > len(bank.questions):
        raise BankTooSmall(
            f"tasksPerTeam {config.tasks_per_team} exceeds bank size {len(bank.questions)}")

    rng = random.Random(config.rng_seed)
    chosen = rng.sample(list(bank.questions), config.tasks_per_team)
    n_stations = len(world.stations)
    teams = []
    for _ in range(config.teams):
        tasks = [
            Task(task_id=f"t{i}", question_id=q.id,
                 station_id=world.stations[i % n_stations].station_id)
            for i, q in enumerate(chosen)
        ]
        teams.append(TeamState(tasks=tasks))
    return GameState(config=config, bank=bank, world=world, teams=teams)


def join_player(state: GameState, name: str, now: int) -> tuple[str, list[Event]]:
    if state.phase != PHASE_LOBBY:
        raise GameNotJoinable(f"game is {state.phase}")
    capacity = state.config.teams * state.config.max_players_per_team
    if len(state.players) >= capacity:
        raise GameFull(f"game already has {capacity} players")
    n = state.join_count
    suffix = random.Random(f"{state.config.rng_seed}:pid:{n}").getrandbits(48)
    player_id = f"p{n:02d}-{suffix:012x}"
    state.players[player_id] = PlayerState(player_id=player_id, name=name)
    state.join_count += 1
    ev = _emit(state, "player_joined", "game", now, {"playerId": player_id, "name": name})
    return player_id, [ev]


def select_team(state: GameState, player_id: str, team: int, now: int) -> list[Event]:
    _require_phase(state, PHASE_LOBBY)
    player = _require_player(state, player_id)
    if not (0 <= team < state.config.teams):
        raise NoSuchTeam(f"team {team} not in 0..{state.config.teams - 1}")
    seated = sum(1 for p in state.players.values()
                 if p.team == team and p.player_id != player_id)
    if seated >= state.config.max_players_per_team:
        raise TeamFull(f"team {team} already has {seated} players")
    player.team = team
    ev = _emit(state, "team_selected", "game", now, {"playerId": player_id, "team": team})
    return [ev]


def start_game(state: GameState, now: int) -> list[Event]:
    _require_phase(state, PHASE_LOBBY)
    unassigned = [p.player_id for p in state.players.values() if p.team is None]
    if unassigned:
        raise UnassignedPlayers(f"players without a team: {unassigned}")
    non_empty = {p.team for p in state.players.values()}
    needed = 1 if state.config.teams == 1 else 2
    if len(non_empty) < needed:
        raise NotEnoughPlayers(f"need {needed} non-empty teams, have {len(non_empty)}")

    state.phase = PHASE_RUNNING
    state.started_at = now
    counters = [0] * state.config.teams
    for p in state.players.values():  # insertion order = join order
        assert p.team is not None
        spawn_list = state.world.spawns[p.team]
        p.pos = spawn_list[counters[p.team] % len(spawn_list)]
        counters[p.team] += 1

    ev = _emit(state, "game_started", "game", now, {
        "startedAt": now,
        "mapRef": state.config.map_ref,
        "positions": {p.player_id: list(p.pos) for p in state.players.values() if p.pos},
        "taskLists": {
            str(t): [task.to_dict() for task in team.tasks]
            for t, team in enumerate(state.teams)
        },
    })
    return [ev]


def _cancel_presentation(state: GameState, player_id: str, now: int) -> list[Event]:
    pres = state.presentations.pop(player_id, None)
    if pres is None:
        return []
    ev = _emit(state, "question_cancelled", f"player:{player_id}", now,
               {"taskId": pres.task_id})
    return [ev]


def handle_move(state: GameState, player_id: str, direction: Direction, now: int) -> list[Event]:
    """Apply one arrow-key step.

    Moves beyond 10 within any sliding 1000 ms window are discarded without
    error. A step that actually changes position cancels any open question
    for the player (walking away from the machine).
    """
    _require_phase(state, PHASE_RUNNING)
    player = _require_player(state, player_id)
    assert player.pos is not None

    window = state.move_windows.setdefault(player_id, [])
    window[:] = [t for t in window if t > now - MOVE_WINDOW_MILLIS]
    if len(window) >= MOVE_WINDOW_LIMIT:
        return []
    window.append(now)

    new_pos = apply_move(state.world, player.pos, direction)
    if new_pos == player.pos:
        return []
    player.pos = new_pos
    events = _cancel_presentation(state, player_id, now)
    events.append(_emit(state, "position_changed", "game", now,
                        {"playerId": player_id, "pos": list(new_pos)}))
    return events


def handle_cancel(state: GameState, player_id: str, now: int) -> list[Event]:
    _require_phase(state, PHASE_RUNNING)
    _require_player(state, player_id)
    return _cancel_presentation(state, player_id, now)


def handle_interact(state: GameState, player_id: str, now: int) -> list[Event]:
    """Ask the station next to the player for the team's next question.

    Selects the lowest-indexed pending team task bound to the reachable
    station that is not cooling down for this player; if every candidate is
    cooling down, reports the earliest expiry instead.
    """
    _require_phase(state, PHASE_RUNNING)
    player = _require_player(state, player_id)
    assert player.pos is not None and player.team is not None

    station = reachable_station(state.world, player.pos)
    if station is None:
        return [_emit(state, "nothing_here", f"player:{player_id}", now, {})]

    team = state.teams[player.team]
    candidates = [t for t in team.tasks
                  if t.status == TASK_PENDING and t.station_id == station]
    if not candidates:
        return [_emit(state, "nothing_here", f"player:{player_id}", now, {})]

    # Lazy prune: drop this player's expired cooldowns before consulting.
    expired = [k for k, exp in state.cooldowns.items()
               if k[0] == player_id and exp <= now]
    for k in expired:
        del state.cooldowns[k]

    eligible = [t for t in candidates if (player_id, t.task_id) not in state.cooldowns]
    if not eligible:
        earliest = min(candidates, key=lambda t: state.cooldowns[(player_id, t.task_id)])
        expires = state.cooldowns[(player_id, earliest.task_id)]
        return [_emit(state, "cooldown_active", f"player:{player_id}", now,
                      {"taskId": earliest.task_id, "expiresAt": expires})]

    task = eligible[0]
    question = state.question_by_id(task.question_id)
    seed = state.config.rng_seed + len(state.event_log)
    presented, token_map = present_question(question, task.task_id, seed)
    state.presentations[player_id] = Presentation(
        task_id=task.task_id, question_id=question.id,
        token_map=token_map, presented_at=now)
    ev = _emit(state, "question_presented", f"player:{player_id}", now,
               {"taskId": task.task_id, "question": presented.to_payload()})
    return [ev]


def _task_update_event(state: GameState, team_idx: int, now: int) -> Event:
    team = state.teams[team_idx]
    return _emit(state, "task_update", f"team:{team_idx}", now, {
        "team": team_idx,
        "completed": team.completed_count,
        "total": len(team.tasks),
        "energy": team.energy,
        "tasks": [t.to_dict() for t in team.tasks],
    })


def handle_answer(state: GameState, player_id: str, task_id: str,
                  submission: grading.Submission, now: int) -> list[Event]:
    """Grade the submission against the player's active presentation.

    Correct answers complete the task for the whole team and may win the
    game; wrong answers only start a per-(player, task) retry cooldown. A
    task a teammate completed since the presentation resolves to
    task_already_completed with no grade recorded. Grading faults
    (TypeMismatch, UnknownToken, ...) propagate without consuming the
    presentation.
    """
    _require_phase(state, PHASE_RUNNING)
    player = _require_player(state, player_id)
    assert player.team is not None

    pres = state.presentations.get(player_id)
    if pres is None or pres.task_id != task_id:
        raise NoActivePresentation(f"player {player_id} has no active presentation for {task_id!r}")

    team_idx = player.team
    team = state.teams[team_idx]
    task = next(t for t in team.tasks if t.task_id == task_id)

    if task.status == TASK_COMPLETED:
        del state.presentations[player_id]
        return [_emit(state, "task_already_completed", f"player:{player_id}", now,
                      {"taskId": task_id})]

    question = state.question_by_id(pres.question_id)
    verdict = grading.grade(question, pres.token_map, submission)
    del state.presentations[player_id]

    events: list[Event] = []
    if verdict is grading.Verdict.CORRECT:
        task.status = TASK_COMPLETED
        task.completed_by = player_id
        task.completed_at = now
        team.energy += state.config.energy_per_task
        events.append(_emit(state, "answer_result", f"player:{player_id}", now, {
            "playerId": player_id, "team": team_idx,
            "taskId": task_id, "verdict": "correct",
        }))
        events.append(_task_update_event(state, team_idx, now))
        if team.completed_count == state.config.tasks_per_team:
            state.phase = PHASE_FINISHED
            state.winner_team = team_idx
            state.ended_at = now
            events.append(_emit(state, "game_over", "game", now,
                                {"winnerTeam": team_idx, "endedAt": now}))
    else:
        expires = now + state.config.cooldown_millis
        state.cooldowns[(player_id, task_id)] = expires
        events.append(_emit(state, "answer_result", f"player:{player_id}", now, {
            "playerId": player_id, "team": team_idx,
            "taskId": task_id, "verdict": "incorrect",
            "cooldownUntil": expires,
        }))
    return events


def set_connected(state: GameState, player_id: str, connected: bool, now: int) -> list[Event]:
    player = _require_player(state, player_id)
    if player.connected == connected:
        return []
    player.connected = connected
    ev = _emit(state, "connection_changed", "game", now,
               {"playerId": player_id, "connected": connected})
    return [ev]


def snapshot(state: GameState) -> dict:
    """Read-only supervision projection. Carries no answer data."""
    return {
        "phase": state.phase,
        "startedAt": state.started_at,
        "endedAt": state.ended_at,
        "winnerTeam": state.winner_team,
        "teams": [
            {
                "team": t,
                "energy": team.energy,
                "completed": team.completed_count,
                "total": len(team.tasks),
                "tasks": [task.to_dict(with_question_id=True) for task in team.tasks],
            }
            for t, team in enumerate(state.teams)
        ],
        "players": [
            {
                "playerId": p.player_id,
                "name": p.name,
                "team": p.team,
                "pos": list(p.pos) if p.pos is not None else None,
                "connected": p.connected,
            }
            for p in state.players.values()
        ],
    }


def _event_digest(events: list[Event]) -> str:
    payload = json.dumps([e.to_dict() for e in events], sort_keys=True).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def finalize(state: GameState, now: int, reason: str) -> tuple[Report, list[Event]]:
    """End the game (if still running) and assemble the immutable report.

    Idempotent: the first call fixes the report; later calls return the
    same object and emit nothing.
    """
    if state.phase == PHASE_LOBBY:
        raise WrongPhase("cannot finalize a lobby-phase game")
    if state.report is not None:
        return state.report, []

    events: list[Event] = []
    if state.phase == PHASE_RUNNING:
        state.phase = PHASE_FINISHED
        state.ended_at = now
        events.append(_emit(state, "game_over", "game", now,
                            {"winnerTeam": None, "endedAt": now}))
    state.finalize_reason = reason
    assert state.ended_at is not None

    finish_order: list[dict] = []
    if state.winner_team is not None:
        finish_order.append({"team": state.winner_team, "finishMillis": state.ended_at})
    losers = [t for t in range(state.config.teams) if t != state.winner_team]
    losers.sort(key=lambda t: (-state.teams[t].completed_count, t))
    for t in losers:
        finish_order.append({"team": t, "didNotFinish": True,
                             "completed": state.teams[t].completed_count})

    attempts: dict[tuple[int, str], int] = {}
    per_player_stats: dict[str, dict] = {
        p.player_id: {"playerId": p.player_id, "name": p.name, "team": p.team,
                      "submissions": 0, "correctCount": 0}
        for p in state.players.values()
    }
    for ev in state.event_log:
        if ev.kind != "answer_result":
            continue
        key = (ev.data["team"], ev.data["taskId"])
        attempts[key] = attempts.get(key, 0) + 1
        stats = per_player_stats[ev.data["playerId"]]
        stats["submissions"] += 1
        if ev.data["verdict"] == "correct":
            stats["correctCount"] += 1

    per_task = []
    for t, team in enumerate(state.teams):
        for task in team.tasks:
            per_task.append({
                "team": t,
                "taskId": task.task_id,
                "questionId": task.question_id,
                "stationId": task.station_id,
                "attempts": attempts.get((t, task.task_id), 0),
                "completedBy": task.completed_by,
                "completedAtMillis": task.completed_at,
            })

    report = Report(
        game_id=state.config.game_id,
        config=state.config.to_dict(),
        reason=reason,
        ended_at=state.ended_at,
        winner_team=state.winner_team,
        finish_order=tuple(finish_order),
        per_task=tuple(per_task),
        per_player=tuple(per_player_stats.values()),
        event_digest=_event_digest(state.event_log),
    )
    state.report = report
    return report, events


def apply(state: GameState, op: str, args: dict[str, Any], now: int) -> tuple[Any, list[Event]]:
    """Uniform dispatcher used by the transport layer and by replay checks."""
    if op == "join":
        return join_player(state, args["name"], now)
    if op == "select_team":
        return None, select_team(state, args["player_id"], args["team"], now)
    if op == "start":
        return None, start_game(state, now)
    if op == "move":
        return None, handle_move(state, args["player_id"], args["direction"], now)
    if op == "interact":
        return None, handle_interact(state, args["player_id"], now)
    if op == "answer":
        return None, handle_answer(state, args["player_id"], args["task_id"],
                                   args["submission"], now)
    if op == "cancel":
        return None, handle_cancel(state, args["player_id"], now)
    if op == "set_connected":
        return None, set_connected(state, args["player_id"], args["connected"], now)
    if op == "finalize":
        return finalize(state, now, args["reason"])
    raise ValueError(f"unknown op {op!r}")


def state_fingerprint(state: GameState) -> dict:
    """Full deterministic serialization of a game, for replay comparison."""
    return {
        "phase": state.phase,
        "startedAt": state.started_at,
        "endedAt": state.ended_at,
        "winnerTeam": state.winner_team,
        "finalizeReason": state.finalize_reason,
        "joinCount": state.join_count,
        "players": {
            pid: {"name": p.name, "team": p.team,
                  "pos": list(p.pos) if p.pos else None, "connected": p.connected}
            for pid, p in state.players.items()
        },
        "teams": [
            {"energy": team.energy, "tasks": [t.to_dict(with_question_id=True) for t in team.tasks]}
            for team in state.teams
        ],
        "cooldowns": {f"{pid}/{tid}": exp for (pid, tid), exp in sorted(state.cooldowns.items())},
        "presentations": {
            pid: {"taskId": pr.task_id, "questionId": pr.question_id,
                  "tokenMap": dict(sorted(pr.token_map.items())), "presentedAt": pr.presented_at}
            for pid, pr in sorted(state.presentations.items())
        },
        "moveWindows": {pid: list(w) for pid, w in sorted(state.move_windows.items())},
        "eventLog": [e.to_dict() for e in state.event_log],
        "report": state.report.to_dict() if state.report else None,
    }
