// Plain 2D tile rendering on a canvas: 32 px tiles, no game framework.

import type { Cell, MapDoc } from "./protocol";
import type { ViewState } from "./state";

export const TILE = 32;

export const TEAM_COLORS = ["#ff5d5d", "#5db2ff", "#63e06a", "#ffd24d"];

export function teamColor(team: number | null | undefined): string {
  return team === null || team === undefined ? "#cccccc" : TEAM_COLORS[team % TEAM_COLORS.length];
}

export function sizeCanvas(canvas: HTMLCanvasElement, map: MapDoc): void {
  canvas.width = map.width * TILE;
  canvas.height = map.height * TILE;
}

export function drawWorld(
  ctx: CanvasRenderingContext2D,
  view: ViewState,
  teamOf: (playerId: string) => number | null,
): void {
  const map = view.map;
  if (!map) return;
  ctx.fillStyle = "#10141f";
  ctx.fillRect(0, 0, map.width * TILE, map.height * TILE);

  // floor grid
  ctx.strokeStyle = "#1c2333";
  ctx.lineWidth = 1;
  for (let x = 0; x <= map.width; x++) {
    ctx.beginPath();
    ctx.moveTo(x * TILE + 0.5, 0);
    ctx.lineTo(x * TILE + 0.5, map.height * TILE);
    ctx.stroke();
  }
  for (let y = 0; y <= map.height; y++) {
    ctx.beginPath();
    ctx.moveTo(0, y * TILE + 0.5);
    ctx.lineTo(map.width * TILE, y * TILE + 0.5);
    ctx.stroke();
  }

  ctx.fillStyle = "#39415c";
  for (const [x, y] of map.blocked) {
    ctx.fillRect(x * TILE + 1, y * TILE + 1, TILE - 2, TILE - 2);
  }

  const pendingStations = new Set(
    view.tasks.filter((t) => t.status === "pending").map((t) => t.stationId),
  );
  for (const st of map.stations) {
    const [x, y] = st.cell;
    ctx.fillStyle = pendingStations.has(st.id) ? "#c8741f" : "#5a5f6e";
    ctx.fillRect(x * TILE + 4, y * TILE + 4, TILE - 8, TILE - 8);
    ctx.fillStyle = "#0e1018";
    ctx.font = "bold 14px monospace";
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    ctx.fillText(String(st.id), x * TILE + TILE / 2, y * TILE + TILE / 2);
  }

  for (const [pid, pos] of Object.entries(view.positions)) {
    drawPlayer(ctx, pos, teamColor(teamOf(pid)), pid === view.playerId);
  }
}

function drawPlayer(ctx: CanvasRenderingContext2D, pos: Cell, color: string, me: boolean): void {
  const [x, y] = pos;
  const cx = x * TILE + TILE / 2;
  const cy = y * TILE + TILE / 2;
  ctx.beginPath();
  ctx.arc(cx, cy, TILE / 2 - 7, 0, Math.PI * 2);
  ctx.fillStyle = color;
  ctx.fill();
  if (me) {
    ctx.beginPath();
    ctx.arc(cx, cy, TILE / 2 - 3, 0, Math.PI * 2);
    ctx.strokeStyle = "#ffffff";
    ctx.lineWidth = 2;
    ctx.stroke();
  }
}
