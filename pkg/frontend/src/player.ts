// Player view: join flow, grid world, arrow-key movement, click to
// interact, the four question dialogs, and the task-list overlay.

import { renderQuestionDialog, el } from "./dialogs";
import { Wire } from "./net";
import type { Dir, ServerMessage } from "./protocol";
import { parseServerMessage } from "./protocol";
import { drawWorld, sizeCanvas, teamColor } from "./render";
import { cooldownRemaining, initialView, reduce } from "./state";

const ARROWS: Record<string, Dir> = {
  ArrowUp: "up",
  ArrowDown: "down",
  ArrowLeft: "left",
  ArrowRight: "right",
};

export function mountPlayer(app: HTMLElement): void {
  let view = initialView();
  let wire: Wire | null = null;
  const teamByPlayer = new Map<string, number>();

  const joinPane = el("div", "pane join-pane");
  const codeInput = input("game code (6 letters)");
  codeInput.maxLength = 6;
  const nameInput = input("your name");
  const joinBtn = el("button", "primary", "Find game") as HTMLButtonElement;
  const joinError = el("div", "input-hint");
  joinPane.append(el("h2", "", "Join a game"), codeInput, nameInput, joinBtn, joinError);

  const lobbyPane = el("div", "pane hidden");
  const gamePane = el("div", "pane hidden game-pane");
  const canvas = document.createElement("canvas");
  const hud = el("div", "hud");
  const overlay = el("div", "overlay hidden");
  gamePane.append(canvas, hud, overlay);
  app.append(joinPane, lobbyPane, gamePane);

  const ctx = canvas.getContext("2d")!;

  function apply(msg: ServerMessage): void {
    view = reduce(view, msg);
    if (msg.type === "lobby_update") {
      const payload = msg.payload as ServerMessage<"lobby_update">["payload"];
      for (const p of payload.players) {
        if (p.team !== null && p.team !== undefined) teamByPlayer.set(p.playerId, p.team);
      }
    }
    render();
  }

  function render(): void {
    joinPane.classList.toggle("hidden", view.role === "player");
    lobbyPane.classList.toggle("hidden", !(view.role === "player" && view.phase === "lobby"));
    gamePane.classList.toggle("hidden", !(view.role === "player" && view.phase !== "lobby"));
    if (view.role === "player" && view.phase === "lobby") renderLobby();
    if (view.phase !== "lobby" && view.map) {
      sizeCanvas(canvas, view.map);
      drawWorld(ctx, view, (pid) => teamByPlayer.get(pid) ?? null);
      renderHud();
      renderOverlay();
    }
  }

  function renderLobby(): void {
    lobbyPane.textContent = "";
    lobbyPane.append(el("h2", "", `Game ${view.gameCode ?? ""} - pick a team`));
    const picker = el("div", "team-picker");
    for (let t = 0; t < 4; t++) {
      const members = view.roster.filter((p) => p.team === t);
      const btn = el("button", "team-btn", `Team ${t + 1} (${members.length})`) as HTMLButtonElement;
      btn.style.borderColor = teamColor(t);
      if (view.team === t) btn.classList.add("chosen");
      btn.addEventListener("click", () => wire?.send("select_team", { team: t }));
      picker.appendChild(btn);
    }
    lobbyPane.appendChild(picker);
    const roster = el("ul", "roster");
    for (const p of view.roster) {
      const item = el("li", "", `${p.name}${p.connected === false ? " (away)" : ""}`);
      item.style.color = teamColor(p.team ?? null);
      roster.appendChild(item);
    }
    lobbyPane.append(el("h3", "", "Players"), roster,
                     el("p", "muted", "Waiting for the host to start..."));
  }

  function renderHud(): void {
    hud.textContent = "";
    hud.append(el("span", "hud-chip", `team ${String((view.team ?? 0) + 1)}`),
               el("span", "hud-chip", `tasks ${view.completed}/${view.total}`),
               el("span", "hud-chip", `energy ${view.energy}`));
    const tasksBtn = el("button", "mini", "task list") as HTMLButtonElement;
    tasksBtn.addEventListener("click", () => {
      view = { ...view, taskOverlayVisible: true };
      render();
    });
    hud.appendChild(tasksBtn);
    if (view.notice === "nothing_here") hud.appendChild(el("span", "hud-note", "nothing here"));
    if (view.notice === "cooldown") hud.appendChild(el("span", "hud-note", "machine is cooling down"));
    if (view.lastVerdict) {
      hud.appendChild(el("span",
        view.lastVerdict.verdict === "correct" ? "hud-good" : "hud-bad",
        view.lastVerdict.verdict));
    }
  }

  function renderOverlay(): void {
    overlay.textContent = "";
    if (view.phase === "finished") {
      overlay.classList.remove("hidden");
      const win = view.winnerTeam;
      overlay.append(
        el("h2", "", win === null ? "Game ended by the host" :
          win === view.team ? "Your team launched the rocket!" : `Team ${win + 1} wins`),
        el("p", "muted", "You can close this tab."),
      );
      return;
    }
    if (view.activeQuestion) {
      overlay.classList.remove("hidden");
      const dialog = renderQuestionDialog(
        view.activeQuestion,
        (submission) => wire?.sendAnswer(view.activeQuestion!.taskId, submission),
        () => {
          wire?.send("cancel_question");
          view = { ...view, activeQuestion: null };
          render();
        },
      );
      overlay.appendChild(dialog.root);
      return;
    }
    if (view.taskOverlayVisible) {
      overlay.classList.remove("hidden");
      const panel = el("div", "dialog");
      panel.append(el("h3", "", `Tasks - ${view.completed}/${view.total} done`));
      const list = el("ul", "task-list");
      const now = Date.now();
      for (const t of view.tasks) {
        const cool = cooldownRemaining(view, t.taskId, now);
        const status = t.status === "completed" ? "done"
          : cool > 0 ? `retry in ${Math.ceil(cool / 1000)}s` : `at machine ${t.stationId}`;
        const item = el("li", t.status === "completed" ? "task-done" : "task-pending",
                        `${t.taskId}: ${status}`);
        list.appendChild(item);
      }
      const closeBtn = el("button", "primary", "Back to the station") as HTMLButtonElement;
      closeBtn.addEventListener("click", () => {
        view = { ...view, taskOverlayVisible: false };
        render();
      });
      panel.append(list, closeBtn);
      overlay.appendChild(panel);
      return;
    }
    overlay.classList.add("hidden");
  }

  joinBtn.addEventListener("click", () => {
    const code = codeInput.value.trim().toUpperCase();
    const name = nameInput.value.trim();
    if (code.length !== 6 || !name) {
      joinError.textContent = "enter the 6-character code and a name";
      return;
    }
    wire = new Wire(Wire.defaultUrl());
    wire.onMessage = (raw) => {
      const msg = parseServerMessage(raw);
      if (msg) apply(msg);
    };
    wire.onOpen = () => wire?.send("join", { gameCode: code, name });
    wire.onClose = () => {
      joinError.textContent = "connection lost";
      joinPane.classList.remove("hidden");
    };
  });

  document.addEventListener("keydown", (ev) => {
    const dir = ARROWS[ev.key];
    if (!dir || view.phase !== "running" || !wire) return;
    ev.preventDefault();
    wire.sendMove(dir, Date.now());
  });

  canvas.addEventListener("click", () => {
    if (view.phase === "running") wire?.send("interact");
  });

  render();
}

function input(placeholder: string): HTMLInputElement {
  const node = document.createElement("input");
  node.type = "text";
  node.placeholder = placeholder;
  return node;
}
