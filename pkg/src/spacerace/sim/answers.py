"""Synthetic banks and answer construction for scripted clients.

The harness authors its own bank, so a bot can resolve any presented
question by prompt and build either the provably correct submission or a
deterministically wrong one (complemented selection, out-of-tolerance
number, reversed order, flipped categories).
"""

from __future__ import annotations

import random


def make_sim_bank(seed: int, n_questions: int) -> dict:
    """Bank document cycling through all four question types, unique prompts."""
    rng = random.Random(f"simbank:{seed}")
    qs = []
    for i in range(n_questions):
        kind = i % 4
        if kind == 0:
            n_opts = rng.randint(3, 6)
            options = [f"option {i}.{j}" for j in range(n_opts)]
            correct = sorted(rng.sample(range(n_opts), rng.randint(1, n_opts - 1)))
            qs.append({"id": f"q{i}", "prompt": f"Q{i}: pick the marked options",
                       "type": "multiple_choice", "options": options, "correct": correct})
        elif kind == 1:
            qs.append({"id": f"q{i}", "prompt": f"Q{i}: enter the magic number",
                       "type": "numeric", "answer": float(rng.randint(-500, 500)),
                       "tolerance": 0.5})
        elif kind == 2:
            qs.append({"id": f"q{i}", "prompt": f"Q{i}: sort the steps",
                       "type": "ordering",
                       "items": [f"step {i}.{j}" for j in range(4)]})
        else:
            qs.append({"id": f"q{i}", "prompt": f"Q{i}: sort into bins",
                       "type": "classification",
                       "categories": [f"bin {i}.A", f"bin {i}.B"],
                       "items": [{"text": f"thing {i}.{j}", "category": rng.randint(0, 1)}
                                 for j in range(4)]})
    return {"version": 1, "name": f"sim-bank-{seed}", "questions": qs}


def index_by_prompt(bank_doc: dict) -> dict[str, dict]:
    return {q["prompt"]: q for q in bank_doc["questions"]}


def correct_submission_doc(qdoc: dict, question_payload) -> dict:
    """Right answer for a presented question, resolved through its tokens."""
    if qdoc["type"] == "multiple_choice":
        wanted = {qdoc["options"][i] for i in qdoc["correct"]}
        toks = [o.token for o in question_payload.options if o.text in wanted]
        return {"kind": "multiple_choice", "selected": toks}
    if qdoc["type"] == "numeric":
        return {"kind": "numeric", "value": qdoc["answer"]}
    if qdoc["type"] == "ordering":
        by_text = {i.text: i.token for i in question_payload.items}
        return {"kind": "ordering", "order": [by_text[t] for t in qdoc["items"]]}
    by_text = {i.text: i.token for i in question_payload.items}
    return {"kind": "classification",
            "assignments": {by_text[it["text"]]: it["category"] for it in qdoc["items"]}}


def wrong_submission_doc(qdoc: dict, question_payload) -> dict:
    """Deterministically wrong answer (never accidentally correct)."""
    if qdoc["type"] == "multiple_choice":
        wanted = {qdoc["options"][i] for i in qdoc["correct"]}
        complement = [o.token for o in question_payload.options if o.text not in wanted]
        if complement:
            return {"kind": "multiple_choice", "selected": complement}
        # Every option is correct: any proper subset is wrong.
        return {"kind": "multiple_choice", "selected": [question_payload.options[0].token]}
    if qdoc["type"] == "numeric":
        return {"kind": "numeric", "value": qdoc["answer"] + qdoc.get("tolerance", 0) + 1.0}
    if qdoc["type"] == "ordering":
        by_text = {i.text: i.token for i in question_payload.items}
        return {"kind": "ordering", "order": [by_text[t] for t in reversed(qdoc["items"])]}
    by_text = {i.text: i.token for i in question_payload.items}
    return {"kind": "classification",
            "assignments": {by_text[it["text"]]: 1 - it["category"] for it in qdoc["items"]}}


def first_attempt_correct(seed: int, game_index: int, team: int, bot_index: int,
                          task_id: str, accuracy: float) -> bool:
    """Seeded per-(game, team, bot, task) draw; reproducible across runs."""
    rng = random.Random(f"acc:{seed}:{game_index}:{team}:{bot_index}:{task_id}")
    return rng.random() < accuracy
