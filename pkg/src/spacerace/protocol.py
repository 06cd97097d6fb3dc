"""Wire message vocabulary, codec, and per-session legality rules.

Every client<->server exchange is one JSON object per message (WebSocket
text frame, or one line on the TCP bot port) with the envelope
``{"type": ..., "seq": ..., "payload": {...}}``. Payload schemas are
strict: a missing or mistyped declared field is rejected, unknown extra
fields are ignored for forward compatibility. Field names are camelCase on
the wire.

``seq`` is a per-connection, sender-side strictly increasing counter used
only for rejection and debugging; ordering is the transport's job.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import grading

PHASES = ("lobby", "running", "finished")


class ProtocolError(Exception):
    pass


class NotJson(ProtocolError):
    pass


class UnknownType(ProtocolError):
    def __init__(self, type_name: str):
        self.type_name = type_name
        super().__init__(f"unknown message type {type_name!r}")


class SchemaViolation(ProtocolError):
    def __init__(self, field: str, detail: str = ""):
        self.field = field
        super().__init__(f"schema violation at {field!r}: {detail}" if detail
                         else f"schema violation at {field!r}")


class _Payload(BaseModel):
    model_config = ConfigDict(strict=True, extra="ignore")


# --- shared fragments ------------------------------------------------------

Cell = Annotated[list[int], Field(min_length=2, max_length=2)]


class TokenText(_Payload):
    token: str
    text: str


class TaskEntry(_Payload):
    taskId: str
    stationId: int
    status: Literal["pending", "completed"]
    completedBy: Optional[str] = None
    completedAtMillis: Optional[int] = None


class SnapshotTaskEntry(TaskEntry):
    questionId: str


class LobbyPlayer(_Payload):
    playerId: str
    name: str
    team: Optional[int] = None
    connected: bool = True


class StationDoc(_Payload):
    id: int
    cell: Cell


class MapDoc(_Payload):
    width: int
    height: int
    blocked: list[Cell]
    stations: list[StationDoc]
    spawns: list[list[Cell]]


class GameConfigDoc(_Payload):
    teams: int = Field(ge=1, le=4)
    maxPlayersPerTeam: int = Field(ge=1, le=10)
    tasksPerTeam: int = Field(ge=1)
    cooldownMillis: int = Field(default=10000, ge=0)
    energyPerTask: int = Field(default=1, ge=1)
    rngSeed: Optional[int] = None


# --- submissions -----------------------------------------------------------

class MultipleChoiceSubmissionDoc(_Payload):
    kind: Literal["multiple_choice"]
    selected: list[str]


class NumericSubmissionDoc(_Payload):
    kind: Literal["numeric"]
    value: float = Field(allow_inf_nan=False)


class OrderingSubmissionDoc(_Payload):
    kind: Literal["ordering"]
    order: list[str]


class ClassificationSubmissionDoc(_Payload):
    kind: Literal["classification"]
    assignments: dict[str, Literal[0, 1]]


SubmissionDoc = Annotated[
    Union[MultipleChoiceSubmissionDoc, NumericSubmissionDoc,
          OrderingSubmissionDoc, ClassificationSubmissionDoc],
    Field(discriminator="kind"),
]


def submission_from_doc(doc: Union[MultipleChoiceSubmissionDoc, NumericSubmissionDoc,
                                   OrderingSubmissionDoc, ClassificationSubmissionDoc]
                        ) -> grading.Submission:
    """Convert a decoded wire submission into the grading-level value."""
    if isinstance(doc, MultipleChoiceSubmissionDoc):
        return grading.MultipleChoiceSubmission(selected_tokens=frozenset(doc.selected))
    if isinstance(doc, NumericSubmissionDoc):
        return grading.NumericSubmission(value=doc.value)
    if isinstance(doc, OrderingSubmissionDoc):
        return grading.OrderingSubmission(ordered_tokens=tuple(doc.order))
    return grading.ClassificationSubmission(
        assignments=tuple(sorted(doc.assignments.items())))


# --- client -> server payloads --------------------------------------------

class JoinPayload(_Payload):
    gameCode: str
    name: str


class SelectTeamPayload(_Payload):
    team: int = Field(ge=0, le=3)


class MovePayload(_Payload):
    dir: Literal["up", "down", "left", "right"]


class InteractPayload(_Payload):
    pass


class AnswerPayload(_Payload):
    taskId: str
    submission: SubmissionDoc


class CancelQuestionPayload(_Payload):
    pass


class ResumePayload(_Payload):
    gameCode: str
    playerId: str


class AdminCreateGamePayload(_Payload):
    config: GameConfigDoc
    bankName: Optional[str] = None
    bank: Optional[dict] = None
    mapName: Optional[str] = None


class AdminLoadBankPayload(_Payload):
    name: str
    bank: dict


class AdminStartPayload(_Payload):
    pass


class AdminEndPayload(_Payload):
    pass


class AdminSubscribePayload(_Payload):
    gameCode: str
    adminToken: str


# --- server -> client payloads ---------------------------------------------

class JoinedPayload(_Payload):
    playerId: str
    gameCode: str
    teams: int
    maxPlayersPerTeam: int
    resumed: bool = False


class LobbyUpdatePayload(_Payload):
    phase: Literal["lobby", "running", "finished"]
    players: list[LobbyPlayer]


class GameStartedPayload(_Payload):
    startedAt: int
    team: int
    mapRef: str
    map: MapDoc
    positions: dict[str, Cell]
    tasks: list[TaskEntry]


class PositionChangedPayload(_Payload):
    playerId: str
    pos: Cell


class QuestionPayload(_Payload):
    taskId: str
    prompt: str
    qtype: Literal["multiple_choice", "numeric", "ordering", "classification"]
    options: Optional[list[TokenText]] = None
    items: Optional[list[TokenText]] = None
    categories: Optional[Annotated[list[str], Field(min_length=2, max_length=2)]] = None


class AnswerResultPayload(_Payload):
    taskId: str
    verdict: Literal["correct", "incorrect"]
    cooldownUntil: Optional[int] = None


class TaskUpdatePayload(_Payload):
    team: int
    completed: int
    total: int
    energy: int
    tasks: list[TaskEntry]


class CooldownActivePayload(_Payload):
    taskId: str
    expiresAt: int


class NothingHerePayload(_Payload):
    pass


class TaskAlreadyCompletedPayload(_Payload):
    taskId: str


class GameOverPayload(_Payload):
    endedAt: int
    winnerTeam: Optional[int] = None


class TeamSnapshot(_Payload):
    team: int
    energy: int
    completed: int
    total: int
    tasks: list[SnapshotTaskEntry]


class PlayerSnapshot(_Payload):
    playerId: str
    name: str
    team: Optional[int] = None
    pos: Optional[Cell] = None
    connected: bool = True


class SnapshotPayload(_Payload):
    phase: Literal["lobby", "running", "finished"]
    teams: list[TeamSnapshot]
    players: list[PlayerSnapshot]
    startedAt: Optional[int] = None
    endedAt: Optional[int] = None
    winnerTeam: Optional[int] = None


class FinishEntry(_Payload):
    team: int
    finishMillis: Optional[int] = None
    didNotFinish: Optional[bool] = None
    completed: Optional[int] = None


class PerTaskEntry(_Payload):
    team: int
    taskId: str
    questionId: str
    stationId: int
    attempts: int
    completedBy: Optional[str] = None
    completedAtMillis: Optional[int] = None


class PerPlayerEntry(_Payload):
    playerId: str
    name: str
    team: Optional[int] = None
    submissions: int = 0
    correctCount: int = 0


class ReportPayload(_Payload):
    gameId: str
    config: dict
    reason: Literal["natural", "admin"]
    endedAtMillis: int
    finishOrder: list[FinishEntry]
    perTask: list[PerTaskEntry]
    perPlayer: list[PerPlayerEntry]
    eventLogDigest: str
    winnerTeam: Optional[int] = None


class GameCreatedPayload(_Payload):
    gameCode: str
    adminToken: str


class ErrorPayload(_Payload):
    code: str
    message: str


CLIENT_PAYLOADS: dict[str, type[_Payload]] = {
    "join": JoinPayload,
    "select_team": SelectTeamPayload,
    "move": MovePayload,
    "interact": InteractPayload,
    "answer": AnswerPayload,
    "cancel_question": CancelQuestionPayload,
    "resume": ResumePayload,
    "admin_create_game": AdminCreateGamePayload,
    "admin_load_bank": AdminLoadBankPayload,
    "admin_start": AdminStartPayload,
    "admin_end": AdminEndPayload,
    "admin_subscribe": AdminSubscribePayload,
}

SERVER_PAYLOADS: dict[str, type[_Payload]] = {
    "joined": JoinedPayload,
    "lobby_update": LobbyUpdatePayload,
    "game_started": GameStartedPayload,
    "position_changed": PositionChangedPayload,
    "question": QuestionPayload,
    "answer_result": AnswerResultPayload,
    "task_update": TaskUpdatePayload,
    "cooldown_active": CooldownActivePayload,
    "nothing_here": NothingHerePayload,
    "task_already_completed": TaskAlreadyCompletedPayload,
    "game_over": GameOverPayload,
    "snapshot": SnapshotPayload,
    "report": ReportPayload,
    "game_created": GameCreatedPayload,
    "error": ErrorPayload,
}

ALL_PAYLOADS: dict[str, type[_Payload]] = {**CLIENT_PAYLOADS, **SERVER_PAYLOADS}


@dataclass(frozen=True)
class WireMessage:
    type: str
    seq: int
    payload: _Payload


def encode_envelope(type_name: str, seq: int, payload_doc: dict) -> str:
    """Canonical single-line envelope around an already-dumped payload."""
    doc = {"type": type_name, "seq": seq, "payload": payload_doc}
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":"))


def encode_message(m: WireMessage) -> bytes:
    """Canonical single-line UTF-8 JSON: keys in (type, seq, payload) order,
    payload fields in declaration order, None-valued fields omitted."""
    payload_doc = m.payload.model_dump(mode="json", exclude_none=True)
    return encode_envelope(m.type, m.seq, payload_doc).encode("utf-8")


def decode_message(data: Union[bytes, str]) -> WireMessage:
    """Strict parse of one wire message.

    Raises NotJson for undecodable input, UnknownType for a type outside
    the vocabulary, and SchemaViolation (naming the offending field) for a
    missing or mistyped declared field. Unknown extra fields are ignored.
    """
    try:
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise NotJson(str(exc)) from exc
    if not isinstance(doc, dict):
        raise NotJson("message must be a JSON object")

    type_name = doc.get("type")
    if not isinstance(type_name, str):
        raise SchemaViolation("type", "missing or not a string")
    model = ALL_PAYLOADS.get(type_name)
    if model is None:
        raise UnknownType(type_name)

    seq = doc.get("seq")
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
        raise SchemaViolation("seq", "missing or not an unsigned integer")

    payload_doc = doc.get("payload")
    if not isinstance(payload_doc, dict):
        raise SchemaViolation("payload", "missing or not an object")
    try:
        payload = model.model_validate(payload_doc)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = ".".join(str(p) for p in err["loc"]) or "payload"
        raise SchemaViolation(loc, err["msg"]) from exc
    return WireMessage(type=type_name, seq=seq, payload=payload)


# --- session legality -------------------------------------------------------

@dataclass(frozen=True)
class Unbound:
    pass


@dataclass(frozen=True)
class PlayerRole:
    game_code: str
    player_id: str


@dataclass(frozen=True)
class AdminRole:
    game_code: str
    token: str


SessionRole = Union[Unbound, PlayerRole, AdminRole]

UNBOUND_TYPES = frozenset({"join", "resume", "admin_create_game", "admin_subscribe"})
PLAYER_TYPES = frozenset({"select_team", "move", "interact", "answer", "cancel_question"})
ADMIN_TYPES = frozenset({"admin_load_bank", "admin_start", "admin_end"})

_LOBBY_ONLY = frozenset({"select_team"})
_RUNNING_ONLY = frozenset({"move", "interact", "answer", "cancel_question"})


def legal_in_session(role: SessionRole, phase_hint: Optional[str],
                     m: WireMessage, last_seq: Optional[int] = None) -> Optional[str]:
    """Check whether this session may send ``m`` right now.

    Returns None when allowed, otherwise the rejection reason: "seq" for a
    non-increasing sequence number, "role" for a capability the session does
    not hold, "phase" when the game phase forbids the command.
    """
    if last_seq is not None and m.seq <= last_seq:
        return "seq"
    if m.type in SERVER_PAYLOADS:
        return "role"
    if m.type in UNBOUND_TYPES:
        return None if isinstance(role, Unbound) else "role"
    if m.type in PLAYER_TYPES:
        if not isinstance(role, PlayerRole):
            return "role"
        if phase_hint is not None:
            if m.type in _LOBBY_ONLY and phase_hint != "lobby":
                return "phase"
            if m.type in _RUNNING_ONLY and phase_hint != "running":
                return "phase"
        return None
    if m.type in ADMIN_TYPES:
        return None if isinstance(role, AdminRole) else "role"
    return "role"  # pragma: no cover - vocabulary is closed


def schema_rows() -> list[tuple[str, str, str]]:
    """(direction, type, field summary) rows for the protocol doc table."""
    rows = []
    for direction, table in (("client->server", CLIENT_PAYLOADS),
                             ("server->client", SERVER_PAYLOADS)):
        for name, model in table.items():
            fields = []
            for fname, f in model.model_fields.items():
                opt = "" if f.is_required() else "?"
                fields.append(f"{fname}{opt}")
            rows.append((direction, name, ", ".join(fields) if fields else "(empty)"))
    return rows
