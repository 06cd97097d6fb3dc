#!/usr/bin/env python3
"""Record a real game's server->client message stream for the browser
client's reducer tests.

Runs a loopback server, plays a short two-team game with the bot harness
(one bot per team so the recorded player sees all four question types,
accuracy 0.5 so the stream includes misses and cooldowns), then writes the
team-0 bot's full inbound transcript as JSON lines.

Usage: python scripts/record_golden_transcript.py [out.jsonl]
"""

import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "tests"))

from conftest import LiveServer  # noqa: E402

from spacerace import protocol  # noqa: E402
from spacerace.sim import harness  # noqa: E402
from spacerace.sim.harness import SimConfig  # noqa: E402


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else \
        Path(__file__).parent.parent / "frontend" / "golden" / "transcript.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)

    captured: list[harness.BotClient] = []
    original = harness.BotClient.run

    async def capturing_run(self):
        captured.append(self)
        await original(self)

    harness.BotClient.run = capturing_run
    tmp = Path(tempfile.mkdtemp())
    srv = LiveServer(tmp).start()
    try:
        cfg = SimConfig(server_url=srv.ws_url, teams=2, players_per_team=1,
                        tasks_per_team=4, accuracy=0.5, rng_seed=31,
                        cooldown_millis=600)
        report = harness.run_simulation(cfg)
        assert report.all_passed, [a for a in report.assertions if not a.passed]
    finally:
        srv.stop()
        harness.BotClient.run = original

    bot = next(b for b in captured if b.stats.team == 0 and b.stats.bot_index == 0)
    lines = [protocol.encode_message(m).decode() for m in bot.transcript]
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")

    kinds = sorted({m.type for m in bot.transcript})
    qtypes = sorted({m.payload.qtype for m in bot.transcript if m.type == "question"})
    print(f"wrote {len(lines)} messages to {out}")
    print(f"message types: {kinds}")
    print(f"question types seen: {qtypes}")
    if len(qtypes) < 4:
        print("WARNING: transcript does not cover all four question types")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
