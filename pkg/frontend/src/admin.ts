// Admin console: create a game (reusing a stored bank, pasting one, or
// authoring questions in the form), share the code, watch live snapshots,
// force an end, and read the final report. Speaks only the wire protocol.

import { el } from "./dialogs";
import { Wire } from "./net";
import type { ServerMessage } from "./protocol";
import { parseServerMessage } from "./protocol";
import { teamColor } from "./render";
import { initialView, reduce } from "./state";
import { BankDoc, QuestionDoc, validateBank, validateQuestion } from "./validate";

export function mountAdmin(app: HTMLElement): void {
  let view = initialView();
  let wire: Wire | null = null;
  let lastBank: BankDoc | null = null;
  const authored: QuestionDoc[] = [];

  const createPane = el("div", "pane");
  const dashPane = el("div", "pane hidden");
  app.append(createPane, dashPane);

  // --- create form ---------------------------------------------------------
  createPane.appendChild(el("h2", "", "Host a game"));
  const teams = numberInput("teams (1-4)", 2, 1, 4);
  const players = numberInput("players per team (1-10)", 10, 1, 10);
  const tasks = numberInput("tasks per team", 4, 1, 99);
  const cooldown = numberInput("retry cooldown (ms)", 10000, 0, 600000);
  const grid = el("div", "form-grid");
  grid.append(labeled("Teams", teams), labeled("Players/team", players),
              labeled("Tasks/team", tasks), labeled("Cooldown ms", cooldown));
  createPane.appendChild(grid);

  createPane.appendChild(el("h3", "", "Question bank"));
  const bankArea = document.createElement("textarea");
  bankArea.rows = 8;
  bankArea.placeholder = '{"version": 1, "name": "...", "questions": [...]}  (or author below)';
  createPane.appendChild(bankArea);

  const authorBox = el("div", "author-box");
  createPane.append(el("h3", "", "Author questions"), authorBox);
  mountAuthoringForm(authorBox, authored, () => refreshAuthored());
  const authoredList = el("ul", "task-list");
  createPane.appendChild(authoredList);

  const bankError = el("div", "input-hint");
  const createBtn = el("button", "primary", "Create game") as HTMLButtonElement;
  createPane.append(bankError, createBtn);

  function refreshAuthored(): void {
    authoredList.textContent = "";
    authored.forEach((q) =>
      authoredList.appendChild(el("li", "", `${q.id} [${q.type}] ${q.prompt}`)));
  }

  function currentBank(): BankDoc | null {
    if (bankArea.value.trim()) {
      try {
        return JSON.parse(bankArea.value) as BankDoc;
      } catch (exc) {
        bankError.textContent = `bank JSON does not parse: ${exc}`;
        return null;
      }
    }
    if (authored.length > 0) {
      return { version: 1, name: "authored-in-browser", questions: [...authored] };
    }
    bankError.textContent = "paste a bank or author at least one question";
    return null;
  }

  createBtn.addEventListener("click", () => {
    bankError.textContent = "";
    const bank = currentBank();
    if (!bank) return;
    const violations = validateBank(bank);
    if (violations.length > 0) {
      bankError.textContent = `bank refused: ${violations.slice(0, 4).join("; ")}`;
      return;
    }
    if (tasks.valueAsNumber > bank.questions.length) {
      bankError.textContent = "tasks per team exceeds the bank size";
      return;
    }
    lastBank = bank;
    wire = new Wire(Wire.defaultUrl());
    wire.onMessage = (raw) => {
      const msg = parseServerMessage(raw);
      if (msg) apply(msg);
    };
    wire.onOpen = () =>
      wire?.send("admin_create_game", {
        config: {
          teams: teams.valueAsNumber,
          maxPlayersPerTeam: players.valueAsNumber,
          tasksPerTeam: tasks.valueAsNumber,
          cooldownMillis: cooldown.valueAsNumber,
        },
        bank,
      });
  });

  // --- dashboard -----------------------------------------------------------
  function apply(msg: ServerMessage): void {
    view = reduce(view, msg);
    render();
  }

  function render(): void {
    createPane.classList.toggle("hidden", view.role === "admin");
    dashPane.classList.toggle("hidden", view.role !== "admin");
    if (view.role !== "admin") return;
    dashPane.textContent = "";
    dashPane.append(el("h2", "", `Game ${view.gameCode}`),
                    el("p", "code-banner", view.gameCode ?? ""),
                    el("p", "muted", "Players join with this code."));

    for (const e of view.errors.slice(-3)) dashPane.appendChild(el("p", "hud-bad", e));

    const controls = el("div", "dialog-controls");
    const startBtn = el("button", "primary", "Start game") as HTMLButtonElement;
    startBtn.disabled = view.phase !== "lobby";
    startBtn.addEventListener("click", () => wire?.send("admin_start"));
    const endBtn = el("button", "", "End game") as HTMLButtonElement;
    endBtn.disabled = view.phase === "finished";
    endBtn.addEventListener("click", () => wire?.send("admin_end"));
    controls.append(startBtn, endBtn);
    dashPane.appendChild(controls);

    if (lastBank) {
      const saveRow = el("div", "dialog-controls");
      const nameField = document.createElement("input");
      nameField.type = "text";
      nameField.placeholder = "bank name (letters, digits, - _)";
      nameField.value = lastBank.name.replace(/[^A-Za-z0-9_-]/g, "-").slice(0, 64);
      const saveBtn = el("button", "", "Save bank to server library") as HTMLButtonElement;
      saveBtn.addEventListener("click", () => {
        wire?.send("admin_load_bank", { name: nameField.value, bank: lastBank });
        saveBtn.textContent = "Sent";
        saveBtn.disabled = true;
      });
      saveRow.append(nameField, saveBtn);
      dashPane.appendChild(saveRow);
    }

    if (view.phase === "lobby") {
      const roster = el("ul", "roster");
      for (const p of view.roster) {
        const item = el("li", "", `${p.name} ${p.team === null || p.team === undefined ? "(no team)" : `team ${p.team + 1}`}`);
        item.style.color = teamColor(p.team ?? null);
        roster.appendChild(item);
      }
      dashPane.append(el("h3", "", `Lobby (${view.roster.length} joined)`), roster);
    }

    if (view.snapshot) {
      dashPane.appendChild(el("h3", "", `Live state: ${view.snapshot.phase}`));
      const table = el("table", "snap-table") as HTMLTableElement;
      const head = table.insertRow();
      for (const h of ["team", "done", "energy", "players"]) {
        head.appendChild(el("th", "", h));
      }
      for (const t of view.snapshot.teams) {
        const row = table.insertRow();
        row.insertCell().textContent = `team ${t.team + 1}`;
        row.insertCell().textContent = `${t.completed}/${t.total}`;
        row.insertCell().textContent = String(t.energy);
        const members = view.snapshot.players.filter((p) => p.team === t.team);
        row.insertCell().textContent = members.map((p) =>
          `${p.name}${p.connected === false ? " (away)" : ""}`).join(", ");
        row.style.color = teamColor(t.team);
      }
      dashPane.appendChild(table);
    }

    if (view.winnerTeam !== null && view.phase === "finished") {
      dashPane.appendChild(el("h3", "hud-good", `Winner: team ${view.winnerTeam + 1}`));
    } else if (view.phase === "finished") {
      dashPane.appendChild(el("h3", "", "Ended with no winner"));
    }

    if (view.report) {
      dashPane.appendChild(el("h3", "", "Report"));
      const order = el("ol", "task-list");
      for (const entry of view.report.finishOrder) {
        order.appendChild(el("li", "",
          entry.didNotFinish
            ? `team ${entry.team + 1}: did not finish (${entry.completed ?? 0} done)`
            : `team ${entry.team + 1}: finished at ${entry.finishMillis} ms`));
      }
      dashPane.appendChild(order);
      const raw = document.createElement("pre");
      raw.className = "report-json";
      raw.textContent = JSON.stringify(view.report, null, 2);
      dashPane.appendChild(raw);
    }
  }

  render();
}

function mountAuthoringForm(box: HTMLElement, authored: QuestionDoc[],
                            onChange: () => void): void {
  const typeSel = document.createElement("select");
  for (const t of ["multiple_choice", "numeric", "ordering", "classification"]) {
    const opt = document.createElement("option");
    opt.value = t;
    opt.textContent = t;
    typeSel.appendChild(opt);
  }
  const prompt = textInput("prompt");
  const fieldsBox = el("div", "author-fields");
  const addBtn = el("button", "", "Add question") as HTMLButtonElement;
  const formError = el("div", "input-hint");
  box.append(labeled("Type", typeSel), labeled("Prompt", prompt), fieldsBox, addBtn, formError);

  const fields = {
    options: textInput("options, one per line (first lines...)"),
    correct: textInput("correct indices, e.g. 0,2"),
    answer: textInput("numeric answer"),
    tolerance: textInput("tolerance (default 0)"),
    items: textInput("4 items in the correct order, comma-separated"),
    categories: textInput("two categories, comma-separated"),
    classify: textInput("4 entries as text=0 or text=1, comma-separated"),
  };

  function renderFields(): void {
    fieldsBox.textContent = "";
    switch (typeSel.value) {
      case "multiple_choice":
        fieldsBox.append(labeled("Options (comma-separated)", fields.options),
                         labeled("Correct indices", fields.correct));
        break;
      case "numeric":
        fieldsBox.append(labeled("Answer", fields.answer),
                         labeled("Tolerance", fields.tolerance));
        break;
      case "ordering":
        fieldsBox.append(labeled("Items (correct order)", fields.items));
        break;
      case "classification":
        fieldsBox.append(labeled("Categories", fields.categories),
                         labeled("Items (text=category)", fields.classify));
        break;
    }
  }
  typeSel.addEventListener("change", renderFields);
  renderFields();

  addBtn.addEventListener("click", () => {
    formError.textContent = "";
    const q = buildQuestion();
    if (!q) return;
    const violations = validateQuestion(q);
    if (violations.length > 0) {
      formError.textContent = violations.join("; ");
      return;
    }
    authored.push(q);
    prompt.value = "";
    onChange();
  });

  function buildQuestion(): QuestionDoc | null {
    const id = `q${authored.length + 1}`;
    const base = { id, prompt: prompt.value.trim() };
    switch (typeSel.value) {
      case "multiple_choice":
        return {
          ...base, type: "multiple_choice",
          options: splitList(fields.options.value),
          correct: splitList(fields.correct.value).map(Number).filter(Number.isInteger),
        };
      case "numeric":
        return {
          ...base, type: "numeric",
          answer: Number(fields.answer.value),
          tolerance: fields.tolerance.value.trim() === "" ? 0 : Number(fields.tolerance.value),
        };
      case "ordering":
        return { ...base, type: "ordering", items: splitList(fields.items.value) };
      case "classification": {
        const items: Array<{ text: string; category: 0 | 1 }> = [];
        for (const part of splitList(fields.classify.value)) {
          const [text, cat] = part.split("=");
          items.push({ text: (text ?? "").trim(), category: Number(cat) as 0 | 1 });
        }
        return {
          ...base, type: "classification",
          categories: splitList(fields.categories.value), items,
        };
      }
    }
    return null;
  }
}

function splitList(value: string): string[] {
  return value.split(",").map((s) => s.trim()).filter((s) => s.length > 0);
}

function labeled(label: string, control: HTMLElement): HTMLElement {
  const wrap = el("label", "labeled");
  wrap.append(el("span", "label-text", label), control);
  return wrap;
}

function textInput(placeholder: string): HTMLInputElement {
  const node = document.createElement("input");
  node.type = "text";
  node.placeholder = placeholder;
  return node;
}

function numberInput(placeholder: string, value: number, min: number, max: number): HTMLInputElement {
  const node = document.createElement("input");
  node.type = "number";
  node.placeholder = placeholder;
  node.value = String(value);
  node.min = String(min);
  node.max = String(max);
  return node;
}
