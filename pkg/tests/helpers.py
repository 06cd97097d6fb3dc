"""Builders shared across the test suite."""

from __future__ import annotations

import json

from spacerace import engine, questions, world


def mc(qid="q-mc", options=("a", "b", "c", "d"), correct=(0, 2), prompt="pick"):
    return questions.Question(
        id=qid, prompt=prompt,
        body=questions.MultipleChoice(options=tuple(options), correct=frozenset(correct)))


def num(qid="q-num", answer=42.0, tolerance=0.0, prompt="how many"):
    return questions.Question(
        id=qid, prompt=prompt, body=questions.Numeric(answer=answer, tolerance=tolerance))


def ordering(qid="q-ord", items=("first", "second", "third", "fourth"), prompt="sort"):
    return questions.Question(id=qid, prompt=prompt,
                              body=questions.Ordering(items=tuple(items)))


def classification(qid="q-cls", categories=("hot", "cold"),
                   items=(("sun", 0), ("ice", 1), ("lava", 0), ("snow", 1)),
                   prompt="sort into bins"):
    return questions.Question(
        id=qid, prompt=prompt,
        body=questions.Classification(categories=tuple(categories), items=tuple(items)))


def small_bank(n_extra=0):
    qs = [mc(), num(), ordering(), classification()]
    for i in range(n_extra):
        qs.append(num(qid=f"q-extra{i}", answer=float(i), prompt=f"how many ({i})"))
    return questions.QuestionBank(name="test-bank", questions=tuple(qs))


def make_map(width=8, height=6, blocked=(), stations=((0, (4, 2)),), spawns=None):
    """Small open map; spawns default to the four corners."""
    if spawns is None:
        spawns = [[(1, 1)], [(width - 2, 1)], [(1, height - 2)], [(width - 2, height - 2)]]
    doc = {
        "width": width,
        "height": height,
        "blocked": [list(c) for c in blocked],
        "stations": [{"id": sid, "cell": list(cell)} for sid, cell in stations],
        "spawns": [[list(c) for c in team] for team in spawns],
    }
    return world.map_from_doc(doc)


def map_bytes(**kwargs) -> bytes:
    m = make_map(**kwargs)
    return json.dumps(m.to_doc()).encode()


def make_game(teams=2, max_players=10, tasks=2, cooldown=5000,
              energy_per_task=1, seed=7, bank=None, world_map=None, game_id="TESTGG"):
    bank = bank or small_bank(n_extra=4)
    world_map = world_map or make_map(stations=((0, (4, 2)), (1, (6, 2))))
    cfg = engine.GameConfig(
        teams=teams, max_players_per_team=max_players,
        tasks_per_team=tasks, cooldown_millis=cooldown,
        energy_per_task=energy_per_task, rng_seed=seed,
        bank_ref="test-bank", map_ref="test-map", game_id=game_id)
    return engine.create_game(cfg, bank, world_map)


def seat_and_start(state, names_per_team, now=1000):
    """Join and seat players round-robin, then start. Returns player ids per team."""
    ids = []
    for team, names in enumerate(names_per_team):
        row = []
        for name in names:
            pid, _ = engine.join_player(state, name, now)
            engine.select_team(state, pid, team, now)
            row.append(pid)
        ids.append(row)
    engine.start_game(state, now)
    return ids
