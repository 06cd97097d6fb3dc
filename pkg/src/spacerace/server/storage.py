"""Bank, map, and report files on disk."""

from __future__ import annotations

import importlib.resources
import json
import re
from pathlib import Path

from .. import questions, world
from ..engine import Report, report_bytes

_NAME_RE = re.compile(r"^[A-Za-z0-9_\-]{1,64}$")

DEFAULT_MAP_NAME = "default"


class StorageError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


def check_resource_name(name: str) -> str:
    if not _NAME_RE.match(name):
        raise StorageError("bad_name", f"resource name {name!r} not allowed")
    return name


def bank_path(bank_dir: Path, name: str) -> Path:
    return bank_dir / f"{check_resource_name(name)}.bank.json"


def load_bank_file(bank_dir: Path, name: str) -> questions.QuestionBank:
    path = bank_path(bank_dir, name)
    if not path.is_file():
        raise StorageError("bank_not_found", f"no bank named {name!r}")
    return questions.load_bank(path.read_bytes())


def save_bank_file(bank_dir: Path, name: str, bank: questions.QuestionBank) -> Path:
    path = bank_path(bank_dir, name)
    path.write_bytes(questions.save_bank(bank))
    return path


def list_banks(bank_dir: Path) -> list[str]:
    return sorted(p.name.removesuffix(".bank.json")
                  for p in bank_dir.glob("*.bank.json"))


def default_map_bytes() -> bytes:
    return (importlib.resources.files("spacerace") / "assets/default_map.json").read_bytes()


def load_map_file(map_dir: Path, name: str | None) -> tuple[str, world.WorldMap]:
    """Resolve a map by name; None or "default" means the bundled map."""
    if name is None or name == DEFAULT_MAP_NAME:
        return DEFAULT_MAP_NAME, world.load_map(default_map_bytes())
    path = map_dir / f"{check_resource_name(name)}.map.json"
    if not path.is_file():
        raise StorageError("map_not_found", f"no map named {name!r}")
    return name, world.load_map(path.read_bytes())


def load_inline_bank(doc: dict) -> questions.QuestionBank:
    """Validate an inline-uploaded bank document through the file codepath."""
    return questions.load_bank(json.dumps(doc).encode("utf-8"))


def persist_report(report: Report, report_dir: Path) -> Path:
    """Write `<gameId>-<endedAtMillis>.report.json`; idempotent by name."""
    path = report_dir / f"{report.game_id}-{report.ended_at}.report.json"
    if not path.exists():
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(report_bytes(report))
        tmp.rename(path)
    return path
