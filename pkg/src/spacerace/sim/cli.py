"""spacerace-sim command line entry point."""

from __future__ import annotations

import argparse
import sys

from .harness import ConnectFailure, SimConfig, SimError, SimTimeout, run_simulation


def _server_url(value: str) -> str:
    if value.startswith(("ws://", "wss://")):
        return value
    return f"ws://{value}/ws"


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="spacerace-sim",
        description="Play full games against a running server with scripted clients.")
    parser.add_argument("--server", default="127.0.0.1:8000", metavar="ADDR",
                        help="server address (host:port or ws:// URL)")
    parser.add_argument("--teams", type=int, default=2, choices=range(1, 5))
    parser.add_argument("--players", type=int, default=2, metavar="N",
                        help="players per team (1..10)")
    parser.add_argument("--tasks", type=int, default=4, metavar="N")
    parser.add_argument("--accuracy", type=float, default=1.0,
                        help="first-attempt success probability (0..1)")
    parser.add_argument("--think-time", type=int, default=0, metavar="MS")
    parser.add_argument("--cooldown", type=int, default=10_000, metavar="MS",
                        help="retry cooldown configured into the game")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--games", type=int, default=1)
    parser.add_argument("--timeout", type=float, default=None, metavar="S",
                        help="per-game wall-clock bound (default: derived)")
    parser.add_argument("--out", default=None, metavar="FILE",
                        help="write the JSON report here")
    args = parser.parse_args(argv)

    if not (1 <= args.players <= 10):
        parser.error("--players must be 1..10")
    if not (0.0 <= args.accuracy <= 1.0):
        parser.error("--accuracy must be within 0..1")
    if args.games < 1:
        parser.error("--games must be >= 1")

    cfg = SimConfig(
        server_url=_server_url(args.server),
        teams=args.teams, players_per_team=args.players,
        tasks_per_team=args.tasks, accuracy=args.accuracy,
        think_time_millis=args.think_time, rng_seed=args.seed,
        games=args.games, cooldown_millis=args.cooldown,
        game_timeout_s=args.timeout, out_path=args.out,
    )
    try:
        report = run_simulation(cfg)
    except (ConnectFailure, SimTimeout, SimError) as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return 1

    for g in report.games:
        print(f"game {g.game_index} [{g.game_code}] winner=team{g.winner_team} "
              f"duration={g.duration_ms}ms p50={g.latency_p50_ms:.1f}ms "
              f"p99={g.latency_p99_ms:.1f}ms msgs={g.messages_in}/{g.messages_out}")
    failed = [a for a in report.assertions if not a.passed]
    for a in failed:
        print(f"ASSERTION FAILED: {a.name} ({a.detail})", file=sys.stderr)
    print(f"{len(report.assertions) - len(failed)}/{len(report.assertions)} assertions passed")
    return 0 if report.all_passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
