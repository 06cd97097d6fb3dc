// Build one submission per question type with the dialog builders, taking
// the question payloads from the recorded transcript. The committed output
// is cross-validated by the server-side test suite, proving the dialogs
// emit payloads the grading pipeline accepts.
import { readFileSync, writeFileSync } from "node:fs";
import { parseServerMessage, QuestionPayload, SubmissionDoc } from "../src/protocol";
import {
  buildClassification,
  buildMultipleChoice,
  buildNumeric,
  buildOrdering,
} from "../src/submission";

const questions = new Map<string, QuestionPayload>();
for (const line of readFileSync("golden/transcript.jsonl", "utf-8").split("\n")) {
  if (!line.trim()) continue;
  const msg = parseServerMessage(line);
  if (msg?.type === "question") {
    const q = msg.payload as QuestionPayload;
    if (!questions.has(q.qtype)) questions.set(q.qtype, q);
  }
}

function buildFor(q: QuestionPayload): SubmissionDoc {
  switch (q.qtype) {
    case "multiple_choice": {
      const sub = buildMultipleChoice([q.options![0].token, q.options![1].token]);
      if (!sub) throw new Error("multiple choice builder refused a valid selection");
      return sub;
    }
    case "numeric": {
      const sub = buildNumeric("  -12.5 ");
      if (!sub) throw new Error("numeric builder refused a valid number");
      return sub;
    }
    case "ordering": {
      const sub = buildOrdering(q.items!.map((i) => i.token).reverse());
      if (!sub) throw new Error("ordering builder refused a full arrangement");
      return sub;
    }
    case "classification": {
      const assignments: Record<string, 0 | 1> = {};
      q.items!.forEach((item, idx) => {
        assignments[item.token] = (idx % 2) as 0 | 1;
      });
      const sub = buildClassification(assignments, q);
      if (!sub) throw new Error("classification builder refused a complete assignment");
      return sub;
    }
  }
}

const samples = [...questions.values()].map((q) => ({
  qtype: q.qtype,
  answerPayload: { taskId: q.taskId, submission: buildFor(q) },
}));

if (samples.length !== 4) {
  throw new Error(`expected 4 question types in the transcript, got ${samples.length}`);
}
writeFileSync("golden/sample_submissions.json", JSON.stringify(samples, null, 2) + "\n");
console.log(`emitted ${samples.length} dialog-built answer payloads`);
