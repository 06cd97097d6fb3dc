// Fold the recorded transcript through the reducer and freeze the final
// view state as the golden expectation for the determinism test.
import { readFileSync, writeFileSync } from "node:fs";
import { parseServerMessage } from "../src/protocol";
import { initialView, reduce } from "../src/state";

const transcript = readFileSync("golden/transcript.jsonl", "utf-8")
  .split("\n")
  .filter((l: string) => l.trim().length > 0);

let view = initialView();
for (const line of transcript) {
  const msg = parseServerMessage(line);
  if (!msg) throw new Error(`unparseable transcript line: ${line.slice(0, 80)}`);
  view = reduce(view, msg);
}

writeFileSync("golden/view.json", JSON.stringify(view, null, 2) + "\n");
console.log(`froze golden view after ${transcript.length} messages`);
console.log(`phase=${view.phase} completed=${view.completed}/${view.total} winner=${view.winnerTeam}`);
