// Builders that turn dialog state into answer submissions. Each returns
// null while the input is incomplete (the submit button stays disabled);
// the server remains the grading authority either way.

import type { QuestionPayload, SubmissionDoc } from "./protocol";

export function buildMultipleChoice(selectedTokens: string[]): SubmissionDoc | null {
  const unique = [...new Set(selectedTokens)];
  if (unique.length === 0) return null; // mirrors the server's EmptySelection fault
  return { kind: "multiple_choice", selected: unique };
}

export interface NumericParse {
  ok: boolean;
  value?: number;
  error?: string;
}

export function parseNumericInput(text: string): NumericParse {
  const trimmed = text.trim();
  if (trimmed === "") return { ok: false, error: "enter a number" };
  const value = Number(trimmed);
  if (!Number.isFinite(value)) return { ok: false, error: "not a finite number" };
  return { ok: true, value };
}

export function buildNumeric(text: string): SubmissionDoc | null {
  const parsed = parseNumericInput(text);
  if (!parsed.ok || parsed.value === undefined) return null;
  return { kind: "numeric", value: parsed.value };
}

export function buildOrdering(orderedTokens: string[]): SubmissionDoc | null {
  if (orderedTokens.length !== 4) return null;
  if (new Set(orderedTokens).size !== 4) return null;
  return { kind: "ordering", order: [...orderedTokens] };
}

export function buildClassification(
  assignments: Record<string, 0 | 1>,
  question: QuestionPayload,
): SubmissionDoc | null {
  const items = question.items ?? [];
  if (items.length === 0) return null;
  for (const item of items) {
    if (assignments[item.token] !== 0 && assignments[item.token] !== 1) {
      return null; // every item must be placed before submitting
    }
  }
  const complete: Record<string, 0 | 1> = {};
  for (const item of items) complete[item.token] = assignments[item.token];
  return { kind: "classification", assignments: complete };
}
