// Client view state: a pure fold over the ordered server message stream.
// No game fact is invented locally; positions, verdicts and progress all
// come from the server. The reducer never reads the clock, so replaying a
// recorded transcript reproduces the exact same view state.

import type {
  Cell,
  LobbyPlayer,
  MapDoc,
  QuestionPayload,
  ReportPayload,
  ServerMessage,
  SnapshotPayload,
  TaskEntry,
} from "./protocol";

export interface ViewState {
  role: "none" | "player" | "admin";
  lastServerSeq: number;
  gameCode: string | null;
  adminToken: string | null;
  playerId: string | null;
  team: number | null;
  phase: "lobby" | "running" | "finished";
  roster: LobbyPlayer[];
  map: MapDoc | null;
  positions: Record<string, Cell>;
  tasks: TaskEntry[];
  completed: number;
  total: number;
  energy: number;
  taskOverlayVisible: boolean;
  activeQuestion: QuestionPayload | null;
  cooldowns: Record<string, number>;
  lastVerdict: { taskId: string; verdict: "correct" | "incorrect" } | null;
  notice: string | null;
  winnerTeam: number | null;
  endedAt: number | null;
  snapshot: SnapshotPayload | null;
  report: ReportPayload | null;
  errors: string[];
}

export function initialView(): ViewState {
  return {
    role: "none",
    lastServerSeq: 0,
    gameCode: null,
    adminToken: null,
    playerId: null,
    team: null,
    phase: "lobby",
    roster: [],
    map: null,
    positions: {},
    tasks: [],
    completed: 0,
    total: 0,
    energy: 0,
    taskOverlayVisible: false,
    activeQuestion: null,
    cooldowns: {},
    lastVerdict: null,
    notice: null,
    winnerTeam: null,
    endedAt: null,
    snapshot: null,
    report: null,
    errors: [],
  };
}

export function reduce(view: ViewState, msg: ServerMessage): ViewState {
  const next: ViewState = { ...view, lastServerSeq: msg.seq, notice: null };
  switch (msg.type) {
    case "joined": {
      const p = msg.payload as ServerMessage<"joined">["payload"];
      next.role = "player";
      next.playerId = p.playerId;
      next.gameCode = p.gameCode;
      return next;
    }
    case "game_created": {
      const p = msg.payload as ServerMessage<"game_created">["payload"];
      next.role = "admin";
      next.gameCode = p.gameCode;
      next.adminToken = p.adminToken;
      return next;
    }
    case "lobby_update": {
      const p = msg.payload as ServerMessage<"lobby_update">["payload"];
      next.phase = p.phase;
      next.roster = p.players;
      const me = p.players.find((pl) => pl.playerId === view.playerId);
      next.team = me?.team ?? next.team;
      return next;
    }
    case "game_started": {
      const p = msg.payload as ServerMessage<"game_started">["payload"];
      next.phase = "running";
      next.team = p.team;
      next.map = p.map;
      next.positions = { ...p.positions };
      next.tasks = p.tasks;
      next.total = p.tasks.length;
      next.completed = p.tasks.filter((t) => t.status === "completed").length;
      next.taskOverlayVisible = true; // the task list greets the player
      return next;
    }
    case "position_changed": {
      const p = msg.payload as ServerMessage<"position_changed">["payload"];
      next.positions = { ...view.positions, [p.playerId]: p.pos };
      if (p.playerId === view.playerId && view.activeQuestion !== null) {
        // Our own movement walked away from the machine.
        next.activeQuestion = null;
      }
      return next;
    }
    case "question": {
      next.activeQuestion = msg.payload as QuestionPayload;
      next.taskOverlayVisible = false;
      return next;
    }
    case "answer_result": {
      const p = msg.payload as ServerMessage<"answer_result">["payload"];
      next.activeQuestion = null;
      next.lastVerdict = { taskId: p.taskId, verdict: p.verdict };
      if (p.verdict === "incorrect" && p.cooldownUntil !== undefined) {
        next.cooldowns = { ...view.cooldowns, [p.taskId]: p.cooldownUntil };
      }
      return next;
    }
    case "task_update": {
      const p = msg.payload as ServerMessage<"task_update">["payload"];
      if (next.role === "player" && view.team !== null && p.team !== view.team) {
        return next; // another team's progress is not ours to display
      }
      next.tasks = p.tasks;
      next.completed = p.completed;
      next.total = p.total;
      next.energy = p.energy;
      next.taskOverlayVisible = true; // the list reappears on every completion
      return next;
    }
    case "cooldown_active": {
      const p = msg.payload as ServerMessage<"cooldown_active">["payload"];
      next.cooldowns = { ...view.cooldowns, [p.taskId]: p.expiresAt };
      next.notice = "cooldown";
      return next;
    }
    case "nothing_here": {
      next.notice = "nothing_here";
      return next;
    }
    case "task_already_completed": {
      next.activeQuestion = null;
      next.notice = "task_already_completed";
      return next;
    }
    case "game_over": {
      const p = msg.payload as ServerMessage<"game_over">["payload"];
      next.phase = "finished";
      next.winnerTeam = p.winnerTeam ?? null;
      next.endedAt = p.endedAt;
      next.activeQuestion = null;
      return next;
    }
    case "snapshot": {
      next.snapshot = msg.payload as SnapshotPayload;
      const snap = next.snapshot;
      next.phase = snap.phase;
      if (snap.winnerTeam !== undefined) next.winnerTeam = snap.winnerTeam;
      return next;
    }
    case "report": {
      next.report = msg.payload as ReportPayload;
      return next;
    }
    case "error": {
      const p = msg.payload as ServerMessage<"error">["payload"];
      next.errors = [...view.errors.slice(-19), `${p.code}: ${p.message}`];
      return next;
    }
    default: {
      // Unknown message types are ignored (forward compatibility).
      // eslint-disable-next-line no-console
      console.warn("ignoring unknown message type", (msg as ServerMessage).type);
      return next;
    }
  }
}

export function cooldownRemaining(view: ViewState, taskId: string, nowMs: number): number {
  const until = view.cooldowns[taskId];
  return until === undefined ? 0 : Math.max(0, until - nowMs);
}
