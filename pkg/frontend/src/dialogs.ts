// The four question dialogs. Each renders into a container and reports a
// SubmissionDoc through the submit callback; submit stays disabled until
// the builders accept the input.

import type { QuestionPayload, SubmissionDoc } from "./protocol";
import {
  buildClassification,
  buildMultipleChoice,
  buildNumeric,
  buildOrdering,
  parseNumericInput,
} from "./submission";

export interface DialogHandle {
  root: HTMLElement;
}

export function renderQuestionDialog(
  question: QuestionPayload,
  onSubmit: (submission: SubmissionDoc) => void,
  onCancel: () => void,
): DialogHandle {
  const root = el("div", "dialog");
  root.appendChild(el("h3", "", question.prompt));
  const body = el("div", "dialog-body");
  root.appendChild(body);

  const controls = el("div", "dialog-controls");
  const submit = el("button", "primary", "Submit") as HTMLButtonElement;
  submit.disabled = true;
  const cancel = el("button", "", "Walk away") as HTMLButtonElement;
  cancel.addEventListener("click", onCancel);
  controls.append(submit, cancel);
  root.appendChild(controls);

  let current: SubmissionDoc | null = null;
  const refresh = (sub: SubmissionDoc | null) => {
    current = sub;
    submit.disabled = sub === null;
  };
  submit.addEventListener("click", () => {
    if (current) onSubmit(current);
  });

  switch (question.qtype) {
    case "multiple_choice":
      mountMultipleChoice(body, question, refresh);
      break;
    case "numeric":
      mountNumeric(body, refresh);
      break;
    case "ordering":
      mountOrdering(body, question, refresh);
      break;
    case "classification":
      mountClassification(body, question, refresh);
      break;
  }
  return { root };
}

function mountMultipleChoice(
  body: HTMLElement,
  q: QuestionPayload,
  refresh: (s: SubmissionDoc | null) => void,
): void {
  const selected = new Set<string>();
  for (const opt of q.options ?? []) {
    const row = el("label", "option-row");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.addEventListener("change", () => {
      if (box.checked) selected.add(opt.token);
      else selected.delete(opt.token);
      refresh(buildMultipleChoice([...selected]));
    });
    row.append(box, el("span", "", opt.text));
    body.appendChild(row);
  }
}

function mountNumeric(body: HTMLElement, refresh: (s: SubmissionDoc | null) => void): void {
  const input = document.createElement("input");
  input.type = "text";
  input.inputMode = "decimal";
  input.placeholder = "your number";
  const hint = el("div", "input-hint");
  input.addEventListener("input", () => {
    const parsed = parseNumericInput(input.value);
    hint.textContent = parsed.ok ? "" : parsed.error ?? "";
    refresh(buildNumeric(input.value));
  });
  body.append(input, hint);
}

function mountOrdering(
  body: HTMLElement,
  q: QuestionPayload,
  refresh: (s: SubmissionDoc | null) => void,
): void {
  let order = (q.items ?? []).map((i) => i.token);
  const texts = new Map((q.items ?? []).map((i) => [i.token, i.text]));
  const list = el("div", "ordering-list");
  body.appendChild(list);

  const redraw = () => {
    list.textContent = "";
    order.forEach((token, idx) => {
      const row = el("div", "ordering-row");
      row.draggable = true;
      row.dataset.token = token;
      row.addEventListener("dragstart", (ev) => {
        ev.dataTransfer?.setData("text/plain", token);
      });
      row.addEventListener("dragover", (ev) => ev.preventDefault());
      row.addEventListener("drop", (ev) => {
        ev.preventDefault();
        const dragged = ev.dataTransfer?.getData("text/plain");
        if (!dragged || dragged === token) return;
        order = order.filter((t) => t !== dragged);
        order.splice(order.indexOf(token), 0, dragged);
        redraw();
      });
      const up = el("button", "mini", "▲") as HTMLButtonElement;
      const down = el("button", "mini", "▼") as HTMLButtonElement;
      up.disabled = idx === 0;
      down.disabled = idx === order.length - 1;
      up.addEventListener("click", () => {
        [order[idx - 1], order[idx]] = [order[idx], order[idx - 1]];
        redraw();
      });
      down.addEventListener("click", () => {
        [order[idx + 1], order[idx]] = [order[idx], order[idx + 1]];
        redraw();
      });
      row.append(el("span", "ordering-pos", String(idx + 1)),
                 el("span", "ordering-text", texts.get(token) ?? "?"), up, down);
      list.appendChild(row);
    });
    refresh(buildOrdering(order));
  };
  redraw();
}

function mountClassification(
  body: HTMLElement,
  q: QuestionPayload,
  refresh: (s: SubmissionDoc | null) => void,
): void {
  const assignments: Record<string, 0 | 1> = {};
  const [catA, catB] = q.categories ?? ["A", "B"];
  for (const item of q.items ?? []) {
    const row = el("div", "classify-row");
    row.appendChild(el("span", "classify-text", item.text));
    for (const cat of [0, 1] as const) {
      const btn = el("button", "classify-choice", cat === 0 ? catA : catB) as HTMLButtonElement;
      btn.addEventListener("click", () => {
        assignments[item.token] = cat;
        row.querySelectorAll("button").forEach((b) => b.classList.remove("chosen"));
        btn.classList.add("chosen");
        refresh(buildClassification(assignments, q));
      });
      row.appendChild(btn);
    }
    body.appendChild(row);
  }
}

export function el(tag: string, cls = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text) node.textContent = text;
  return node;
}
