"""spacerace-server command line entry point."""

from __future__ import annotations

import argparse
import logging
import os
from pathlib import Path

import uvicorn

from .app import ServerSettings, create_app


def _env(name: str, default: str | None = None) -> str | None:
    return os.environ.get(f"SPACERACE_{name}", default)


def build_settings(argv: list[str] | None = None) -> ServerSettings:
    parser = argparse.ArgumentParser(
        prog="spacerace-server",
        description="Host quiz-race games over WebSocket (and optionally plain TCP for bots).")
    parser.add_argument("--listen", default=_env("LISTEN", "127.0.0.1:8000"),
                        metavar="ADDR:PORT", help="listen address (default %(default)s)")
    parser.add_argument("--banks", default=_env("BANKS", "banks"), metavar="DIR",
                        help="question bank directory")
    parser.add_argument("--maps", default=_env("MAPS", "maps"), metavar="DIR",
                        help="map directory")
    parser.add_argument("--reports", default=_env("REPORTS", "reports"), metavar="DIR",
                        help="report output directory")
    parser.add_argument("--max-games", type=int,
                        default=int(_env("MAX_GAMES", "64")), metavar="N",
                        help="maximum concurrent games (default %(default)s)")
    parser.add_argument("--bot-tcp-port", type=int,
                        default=(int(v) if (v := _env("BOT_TCP_PORT")) else None),
                        metavar="PORT", help="optional newline-delimited JSON port for bots")
    parser.add_argument("--idle-timeout-ms", type=int,
                        default=int(_env("IDLE_TIMEOUT_MS", "3600000")), metavar="MS",
                        help="reap games idle longer than this (default 1h)")
    parser.add_argument("--static", default=_env("STATIC"), metavar="DIR",
                        help="browser client bundle to serve at / (e.g. frontend/dist)")
    parser.add_argument("--log-level", default=_env("LOG_LEVEL", "info"),
                        choices=["critical", "error", "warning", "info", "debug"])
    args = parser.parse_args(argv)

    host, _, port = args.listen.rpartition(":")
    if not host or not port.isdigit():
        parser.error(f"--listen must be ADDR:PORT, got {args.listen!r}")

    return ServerSettings(
        host=host, port=int(port),
        bank_dir=Path(args.banks), map_dir=Path(args.maps), report_dir=Path(args.reports),
        max_games=args.max_games, idle_timeout_ms=args.idle_timeout_ms,
        bot_tcp_port=args.bot_tcp_port,
        static_dir=Path(args.static) if args.static else None,
        extra={"log_level": args.log_level},
    )


def main(argv: list[str] | None = None) -> int:
    settings = build_settings(argv)
    logging.basicConfig(level=settings.extra["log_level"].upper(),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        app = create_app(settings)
    except RuntimeError as exc:
        print(f"startup failed: {exc}")
        return 1
    uvicorn.run(app, host=settings.host, port=settings.port,
                log_level=settings.extra["log_level"])
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
