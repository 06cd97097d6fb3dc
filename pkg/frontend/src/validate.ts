// Question/bank validation for the admin authoring form. Mirrors the
// server's rules so invalid banks are refused before upload.

export interface QuestionDoc {
  id: string;
  prompt: string;
  type: "multiple_choice" | "numeric" | "ordering" | "classification";
  options?: string[];
  correct?: number[];
  answer?: number;
  tolerance?: number;
  items?: string[] | Array<{ text: string; category: 0 | 1 }>;
  categories?: string[];
}

export interface BankDoc {
  version: 1;
  name: string;
  questions: QuestionDoc[];
}

export function validateQuestion(q: QuestionDoc): string[] {
  const violations: string[] = [];
  if (!q.id) violations.push("id is empty");
  if (!q.prompt) violations.push("prompt is empty");

  if (q.type === "multiple_choice") {
    const options = q.options ?? [];
    const correct = q.correct ?? [];
    if (options.length < 2 || options.length > 6) {
      violations.push(`options length ${options.length} outside 2..6`);
    }
    if (new Set(options).size !== options.length) {
      violations.push("option texts not pairwise distinct");
    }
    if (correct.length === 0) violations.push("correct set is empty");
    if (correct.some((i) => !Number.isInteger(i) || i < 0 || i >= options.length)) {
      violations.push("correct index out of range");
    }
  } else if (q.type === "numeric") {
    if (typeof q.answer !== "number" || !Number.isFinite(q.answer)) {
      violations.push("answer is not finite");
    }
    const tol = q.tolerance ?? 0;
    if (!Number.isFinite(tol)) violations.push("tolerance is not finite");
    else if (tol < 0) violations.push("tolerance < 0");
  } else if (q.type === "ordering") {
    const items = (q.items ?? []) as string[];
    if (items.length !== 4) violations.push("items length != 4");
    if (new Set(items).size !== items.length) violations.push("items not pairwise distinct");
  } else if (q.type === "classification") {
    const categories = q.categories ?? [];
    if (categories.length !== 2 || categories[0] === categories[1]) {
      violations.push("categories must be two distinct names");
    }
    const items = (q.items ?? []) as Array<{ text: string; category: 0 | 1 }>;
    if (items.length !== 4) violations.push("items length != 4");
    if (items.some((it) => it.category !== 0 && it.category !== 1)) {
      violations.push("item category not 0 or 1");
    }
  } else {
    violations.push(`unknown question type ${(q as QuestionDoc).type}`);
  }
  return violations;
}

export function validateBank(doc: BankDoc): string[] {
  const violations: string[] = [];
  if (doc.version !== 1) violations.push("version must be 1");
  if (!doc.name) violations.push("name is empty");
  if (!Array.isArray(doc.questions) || doc.questions.length < 1) {
    violations.push("questions must be a non-empty list");
    return violations;
  }
  const ids = new Set<string>();
  for (const q of doc.questions) {
    if (ids.has(q.id)) violations.push(`duplicate question id: ${q.id}`);
    ids.add(q.id);
    for (const v of validateQuestion(q)) violations.push(`${q.id || "(no id)"}: ${v}`);
  }
  return violations;
}
