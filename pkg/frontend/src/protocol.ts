// Wire message types. Mirrors docs/protocol.md: one JSON object per
// message, camelCase fields, optional fields omitted when null.

export type QType = "multiple_choice" | "numeric" | "ordering" | "classification";
export type Dir = "up" | "down" | "left" | "right";
export type Cell = [number, number];

export interface TokenText {
  token: string;
  text: string;
}

export interface TaskEntry {
  taskId: string;
  stationId: number;
  status: "pending" | "completed";
  completedBy?: string;
  completedAtMillis?: number;
}

export interface SnapshotTaskEntry extends TaskEntry {
  questionId: string;
}

export interface LobbyPlayer {
  playerId: string;
  name: string;
  team?: number | null;
  connected?: boolean;
}

export interface StationDoc {
  id: number;
  cell: Cell;
}

export interface MapDoc {
  width: number;
  height: number;
  blocked: Cell[];
  stations: StationDoc[];
  spawns: Cell[][];
}

export interface QuestionPayload {
  taskId: string;
  prompt: string;
  qtype: QType;
  options?: TokenText[];
  items?: TokenText[];
  categories?: string[];
}

export interface TeamSnapshot {
  team: number;
  energy: number;
  completed: number;
  total: number;
  tasks: SnapshotTaskEntry[];
}

export interface PlayerSnapshot {
  playerId: string;
  name: string;
  team?: number | null;
  pos?: Cell | null;
  connected?: boolean;
}

export interface SnapshotPayload {
  phase: "lobby" | "running" | "finished";
  teams: TeamSnapshot[];
  players: PlayerSnapshot[];
  startedAt?: number;
  endedAt?: number;
  winnerTeam?: number | null;
}

export interface ReportPayload {
  gameId: string;
  config: Record<string, unknown>;
  reason: "natural" | "admin";
  endedAtMillis: number;
  finishOrder: Array<{ team: number; finishMillis?: number; didNotFinish?: boolean; completed?: number }>;
  perTask: Array<Record<string, unknown>>;
  perPlayer: Array<Record<string, unknown>>;
  eventLogDigest: string;
  winnerTeam?: number | null;
}

export type SubmissionDoc =
  | { kind: "multiple_choice"; selected: string[] }
  | { kind: "numeric"; value: number }
  | { kind: "ordering"; order: string[] }
  | { kind: "classification"; assignments: Record<string, 0 | 1> };

// Server -> client payloads by type.
export interface ServerPayloads {
  joined: { playerId: string; gameCode: string; teams: number; maxPlayersPerTeam: number; resumed?: boolean };
  lobby_update: { phase: "lobby" | "running" | "finished"; players: LobbyPlayer[] };
  game_started: { startedAt: number; team: number; mapRef: string; map: MapDoc; positions: Record<string, Cell>; tasks: TaskEntry[] };
  position_changed: { playerId: string; pos: Cell };
  question: QuestionPayload;
  answer_result: { taskId: string; verdict: "correct" | "incorrect"; cooldownUntil?: number };
  task_update: { team: number; completed: number; total: number; energy: number; tasks: TaskEntry[] };
  cooldown_active: { taskId: string; expiresAt: number };
  nothing_here: Record<string, never>;
  task_already_completed: { taskId: string };
  game_over: { endedAt: number; winnerTeam?: number | null };
  snapshot: SnapshotPayload;
  report: ReportPayload;
  game_created: { gameCode: string; adminToken: string };
  error: { code: string; message: string };
}

export type ServerType = keyof ServerPayloads;

export interface ServerMessage<T extends ServerType = ServerType> {
  type: T;
  seq: number;
  payload: ServerPayloads[T];
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const m = doc as { type?: unknown; seq?: unknown; payload?: unknown };
  if (typeof m.type !== "string" || typeof m.seq !== "number") return null;
  if (typeof m.payload !== "object" || m.payload === null) return null;
  return m as ServerMessage;
}
