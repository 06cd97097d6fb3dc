"""The 2D grid scenario: walkability, movement, station reach, pathfinding.

Cells are (x, y) with x in [0, width) and y in [0, height); y grows
downwards (screen convention). Movement is 4-neighbour and players never
block each other. Stations are the interactable machines where a team's
pending questions are served.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from enum import Enum

TEAM_SLOTS = 4
MAX_STATIONS = 32

Cell = tuple[int, int]


class MapError(Exception):
    pass


class MalformedMap(MapError):
    pass


class InvariantViolation(MapError):
    pass


class Unreachable(MapError):
    pass


class Direction(Enum):
    # Enum order is the documented tie-break order for pathfinding.
    UP = ("up", (0, -1))
    DOWN = ("down", (0, 1))
    LEFT = ("left", (-1, 0))
    RIGHT = ("right", (1, 0))

    def __init__(self, wire: str, delta: Cell):
        self.wire = wire
        self.delta = delta

    @classmethod
    def from_wire(cls, name: str) -> "Direction":
        for d in cls:
            if d.wire == name:
                return d
        raise ValueError(f"unknown direction {name!r}")


_OPPOSITE = {
    Direction.UP: Direction.DOWN,
    Direction.DOWN: Direction.UP,
    Direction.LEFT: Direction.RIGHT,
    Direction.RIGHT: Direction.LEFT,
}


def opposite(d: Direction) -> Direction:
    return _OPPOSITE[d]


@dataclass(frozen=True)
class StationDef:
    station_id: int
    cell: Cell


@dataclass(frozen=True)
class WorldMap:
    width: int
    height: int
    blocked: frozenset[Cell]
    stations: tuple[StationDef, ...]
    spawns: tuple[tuple[Cell, ...], ...]  # one spawn list per team slot

    def in_bounds(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def walkable(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and cell not in self.blocked

    def to_doc(self) -> dict:
        """Map-file / wire representation."""
        return {
            "width": self.width,
            "height": self.height,
            "blocked": [list(c) for c in sorted(self.blocked)],
            "stations": [{"id": s.station_id, "cell": list(s.cell)} for s in self.stations],
            "spawns": [[list(c) for c in team] for team in self.spawns],
        }


def _cell(raw: object, what: str) -> Cell:
    if (not isinstance(raw, list) or len(raw) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in raw)):
        raise MalformedMap(f"{what} must be a [x, y] pair of integers")
    return (raw[0], raw[1])


def map_from_doc(doc: object) -> WorldMap:
    if not isinstance(doc, dict):
        raise MalformedMap("top level must be an object")
    width = doc.get("width")
    height = doc.get("height")
    for name, v in (("width", width), ("height", height)):
        if not isinstance(v, int) or isinstance(v, bool):
            raise MalformedMap(f"{name} must be an integer")
    if width <= 0 or height <= 0:
        raise InvariantViolation("width and height must be positive")

    raw_blocked = doc.get("blocked", [])
    if not isinstance(raw_blocked, list):
        raise MalformedMap("blocked must be a list of cells")
    blocked = frozenset(_cell(c, f"blocked[{i}]") for i, c in enumerate(raw_blocked))

    raw_stations = doc.get("stations")
    if not isinstance(raw_stations, list):
        raise MalformedMap("stations must be a list")
    stations = []
    for i, s in enumerate(raw_stations):
        if not isinstance(s, dict) or not isinstance(s.get("id"), int) or isinstance(s.get("id"), bool):
            raise MalformedMap(f"stations[{i}] must be {{id: int, cell: [x,y]}}")
        stations.append(StationDef(station_id=s["id"], cell=_cell(s.get("cell"), f"stations[{i}].cell")))

    raw_spawns = doc.get("spawns")
    if not isinstance(raw_spawns, list) or len(raw_spawns) != TEAM_SLOTS:
        raise MalformedMap(f"spawns must be a list of {TEAM_SLOTS} spawn lists")
    spawns = tuple(
        tuple(_cell(c, f"spawns[{t}][{i}]") for i, c in enumerate(team))
        for t, team in enumerate(raw_spawns)
    )

    world = WorldMap(width=width, height=height, blocked=blocked,
                     stations=tuple(stations), spawns=spawns)
    _check_invariants(world)
    return world


def _check_invariants(m: WorldMap) -> None:
    if not (1 <= len(m.stations) <= MAX_STATIONS):
        raise InvariantViolation(f"station count {len(m.stations)} outside 1..{MAX_STATIONS}")
    cells = [s.cell for s in m.stations]
    if len(set(cells)) != len(cells):
        raise InvariantViolation("station cells not pairwise distinct")
    ids = [s.station_id for s in m.stations]
    if len(set(ids)) != len(ids):
        raise InvariantViolation("station ids not pairwise distinct")
    for s in m.stations:
        if not m.walkable(s.cell):
            raise InvariantViolation(f"station {s.station_id} on a blocked or out-of-bounds cell")
    for t, team in enumerate(m.spawns):
        if len(team) < 1:
            raise InvariantViolation(f"team slot {t} has no spawn points")
        for c in team:
            if not m.walkable(c):
                raise InvariantViolation(f"spawn {c} of team slot {t} blocked or out of bounds")


def load_map(data: bytes) -> WorldMap:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedMap(f"not a JSON document: {exc}") from exc
    return map_from_doc(doc)


def apply_move(m: WorldMap, pos: Cell, direction: Direction) -> Cell:
    """Step one cell in ``direction``; walls and map edges clamp in place."""
    dx, dy = direction.delta
    nxt = (pos[0] + dx, pos[1] + dy)
    return nxt if m.walkable(nxt) else pos


def reachable_station(m: WorldMap, pos: Cell) -> int | None:
    """Station in interaction reach (Chebyshev distance <= 1), lowest id wins."""
    best: int | None = None
    for s in m.stations:
        if max(abs(s.cell[0] - pos[0]), abs(s.cell[1] - pos[1])) <= 1:
            if best is None or s.station_id < best:
                best = s.station_id
    return best


def station_cell(m: WorldMap, station_id: int) -> Cell:
    for s in m.stations:
        if s.station_id == station_id:
            return s.cell
    raise KeyError(f"no station {station_id}")


def bfs_distances(m: WorldMap, src: Cell) -> dict[Cell, int]:
    """Breadth-first distances from ``src`` over walkable cells."""
    dist = {src: 0}
    queue: deque[Cell] = deque([src])
    while queue:
        cur = queue.popleft()
        for d in Direction:
            nxt = (cur[0] + d.delta[0], cur[1] + d.delta[1])
            if nxt not in dist and m.walkable(nxt):
                dist[nxt] = dist[cur] + 1
                queue.append(nxt)
    return dist


def shortest_path(m: WorldMap, frm: Cell, to: Cell) -> list[Direction]:
    """Minimum-length 4-neighbour path from ``frm`` to ``to``.

    Ties are broken deterministically: at every step the first direction in
    Up, Down, Left, Right order that decreases the remaining distance is
    taken. Raises Unreachable when no path exists.
    """
    if not (m.walkable(frm) and m.walkable(to)):
        raise Unreachable(f"{frm} or {to} is not walkable")
    if frm == to:
        return []
    dist = bfs_distances(m, to)
    if frm not in dist:
        raise Unreachable(f"no path from {frm} to {to}")
    path: list[Direction] = []
    cur = frm
    while cur != to:
        for d in Direction:
            nxt = (cur[0] + d.delta[0], cur[1] + d.delta[1])
            if m.walkable(nxt) and dist.get(nxt, -1) == dist[cur] - 1:
                path.append(d)
                cur = nxt
                break
    return path
