"""Questions, question banks, and the answer-hiding presentation transform.

A bank is a single JSON document (UTF-8) that teachers can author by hand;
``save_bank`` emits a canonical form so that save -> load -> save is
byte-stable. ``present_question`` produces the client-facing view of a
question: every option/item is addressed by an opaque token and nothing in
the output reveals the correct answer.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Union

QUESTION_TYPES = ("multiple_choice", "numeric", "ordering", "classification")

# Ordering and classification are fixed-arity by design: four answers,
# two categories.
ORDERING_ITEMS = 4
CLASSIFICATION_ITEMS = 4

MIN_OPTIONS = 2
MAX_OPTIONS = 6

TOKEN_HEX_LEN = 8


class BankError(Exception):
    """Base class for bank file problems."""


class MalformedFile(BankError):
    """The byte sequence is not a structurally valid bank/map document."""


class InvalidQuestion(BankError):
    """One or more questions violate their invariants.

    ``violations`` maps question id (or list position for id-less entries)
    to the list of broken rules.
    """

    def __init__(self, violations: dict[str, list[str]]):
        self.violations = violations
        super().__init__(f"invalid questions: {violations}")


class DuplicateId(BankError):
    def __init__(self, qid: str):
        self.qid = qid
        super().__init__(f"duplicate question id: {qid!r}")


@dataclass(frozen=True)
class MultipleChoice:
    """Pick the exact set of correct options. 2..6 options, >=1 correct."""

    options: tuple[str, ...]
    correct: frozenset[int]

    kind = "multiple_choice"


@dataclass(frozen=True)
class Numeric:
    """Answer is a number; correct iff |value - answer| <= tolerance."""

    answer: float
    tolerance: float = 0.0

    kind = "numeric"


@dataclass(frozen=True)
class Ordering:
    """Four items; the authored list order is the correct order."""

    items: tuple[str, ...]

    kind = "ordering"


@dataclass(frozen=True)
class Classification:
    """Four items, each belonging to one of two named categories."""

    categories: tuple[str, str]
    items: tuple[tuple[str, int], ...]  # (text, category 0|1)

    kind = "classification"


Body = Union[MultipleChoice, Numeric, Ordering, Classification]


@dataclass(frozen=True)
class Question:
    id: str
    prompt: str
    body: Body


@dataclass(frozen=True)
class QuestionBank:
    name: str
    questions: tuple[Question, ...]
    version: int = 1


# Token map: opaque presentation token -> authored index of the option/item.
TokenMap = dict[str, int]


def validate_question(q: Question) -> list[str]:
    """Return the list of violated rules; empty list means the question is valid."""
    violations: list[str] = []
    if not q.id:
        violations.append("id is empty")
    if not q.prompt:
        violations.append("prompt is empty")

    body = q.body
    if isinstance(body, MultipleChoice):
        n = len(body.options)
        if not (MIN_OPTIONS <= n <= MAX_OPTIONS):
            violations.append(f"options length {n} outside {MIN_OPTIONS}..{MAX_OPTIONS}")
        if len(set(body.options)) != n:
            violations.append("option texts not pairwise distinct")
        if not body.correct:
            violations.append("correct set is empty")
        if any(not isinstance(i, int) or isinstance(i, bool) or not (0 <= i < n) for i in body.correct):
            violations.append("correct index out of range")
    elif isinstance(body, Numeric):
        if not _is_finite(body.answer):
            violations.append("answer is not finite")
        if not _is_finite(body.tolerance):
            violations.append("tolerance is not finite")
        elif body.tolerance < 0:
            violations.append("tolerance < 0")
    elif isinstance(body, Ordering):
        if len(body.items) != ORDERING_ITEMS:
            violations.append(f"items length != {ORDERING_ITEMS}")
        if len(set(body.items)) != len(body.items):
            violations.append("items not pairwise distinct")
    elif isinstance(body, Classification):
        if len(body.categories) != 2 or body.categories[0] == body.categories[1]:
            violations.append("categories must be two distinct names")
        if len(body.items) != CLASSIFICATION_ITEMS:
            violations.append(f"items length != {CLASSIFICATION_ITEMS}")
        if any(cat not in (0, 1) for _, cat in body.items):
            violations.append("item category not 0 or 1")
    else:  # pragma: no cover - unreachable for well-typed callers
        violations.append(f"unknown question body {type(body).__name__}")
    return violations


def _is_finite(x: float) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and x == x and abs(x) != float("inf")


def _expect(cond: bool, msg: str) -> None:
    if not cond:
        raise MalformedFile(msg)


def _question_from_dict(raw: object, pos: int) -> Question:
    _expect(isinstance(raw, dict), f"questions[{pos}] is not an object")
    assert isinstance(raw, dict)
    qid = raw.get("id")
    prompt = raw.get("prompt")
    qtype = raw.get("type")
    _expect(isinstance(qid, str), f"questions[{pos}].id must be a string")
    _expect(isinstance(prompt, str), f"questions[{pos}].prompt must be a string")
    _expect(qtype in QUESTION_TYPES, f"questions[{pos}].type must be one of {QUESTION_TYPES}")

    body: Body
    if qtype == "multiple_choice":
        options = raw.get("options")
        correct = raw.get("correct")
        _expect(isinstance(options, list) and all(isinstance(o, str) for o in options),
                f"questions[{pos}].options must be a list of strings")
        _expect(isinstance(correct, list) and all(isinstance(i, int) and not isinstance(i, bool) for i in correct),
                f"questions[{pos}].correct must be a list of integers")
        body = MultipleChoice(options=tuple(options), correct=frozenset(correct))
    elif qtype == "numeric":
        answer = raw.get("answer")
        tolerance = raw.get("tolerance", 0)
        _expect(_is_number(answer), f"questions[{pos}].answer must be a number")
        _expect(_is_number(tolerance), f"questions[{pos}].tolerance must be a number")
        body = Numeric(answer=float(answer), tolerance=float(tolerance))
    elif qtype == "ordering":
        items = raw.get("items")
        _expect(isinstance(items, list) and all(isinstance(i, str) for i in items),
                f"questions[{pos}].items must be a list of strings")
        body = Ordering(items=tuple(items))
    else:
        categories = raw.get("categories")
        items = raw.get("items")
        _expect(isinstance(categories, list) and len(categories) == 2
                and all(isinstance(c, str) for c in categories),
                f"questions[{pos}].categories must be a list of two strings")
        _expect(isinstance(items, list), f"questions[{pos}].items must be a list")
        parsed = []
        for j, it in enumerate(items):
            _expect(isinstance(it, dict) and isinstance(it.get("text"), str)
                    and it.get("category") in (0, 1),
                    f"questions[{pos}].items[{j}] must be {{text: str, category: 0|1}}")
            parsed.append((it["text"], it["category"]))
        body = Classification(categories=(categories[0], categories[1]), items=tuple(parsed))
    return Question(id=qid, prompt=prompt, body=body)


def _is_number(x: object) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def load_bank(data: bytes) -> QuestionBank:
    """Parse and fully validate a bank file.

    Raises MalformedFile for structural problems, DuplicateId for repeated
    question ids, and InvalidQuestion (with per-question violation lists)
    for semantic rule breaks.
    """
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedFile(f"not a JSON document: {exc}") from exc
    _expect(isinstance(doc, dict), "top level must be an object")
    _expect(doc.get("version") == 1, "version must be 1")
    _expect(isinstance(doc.get("name"), str), "name must be a string")
    raw_questions = doc.get("questions")
    _expect(isinstance(raw_questions, list) and len(raw_questions) >= 1,
            "questions must be a non-empty list")

    questions = [_question_from_dict(raw, i) for i, raw in enumerate(raw_questions)]

    seen: set[str] = set()
    for q in questions:
        if q.id in seen:
            raise DuplicateId(q.id)
        seen.add(q.id)

    violations = {q.id: v for q in questions if (v := validate_question(q))}
    if violations:
        raise InvalidQuestion(violations)
    return QuestionBank(name=doc["name"], questions=tuple(questions))


def question_to_dict(q: Question) -> dict:
    """Bank-file representation of one question, keys in canonical order."""
    out: dict = {"id": q.id, "prompt": q.prompt, "type": q.body.kind}
    body = q.body
    if isinstance(body, MultipleChoice):
        out["options"] = list(body.options)
        out["correct"] = sorted(body.correct)
    elif isinstance(body, Numeric):
        out["answer"] = body.answer
        out["tolerance"] = body.tolerance
    elif isinstance(body, Ordering):
        out["items"] = list(body.items)
    else:
        out["categories"] = list(body.categories)
        out["items"] = [{"text": t, "category": c} for t, c in body.items]
    return out


def save_bank(bank: QuestionBank) -> bytes:
    """Serialize a valid bank in canonical form (fixed key order, 2-space indent)."""
    if not bank.questions:
        raise MalformedFile("bank has no questions")
    violations = {q.id: v for q in bank.questions if (v := validate_question(q))}
    if violations:
        raise InvalidQuestion(violations)
    seen: set[str] = set()
    for q in bank.questions:
        if q.id in seen:
            raise DuplicateId(q.id)
        seen.add(q.id)
    doc = {
        "version": bank.version,
        "name": bank.name,
        "questions": [question_to_dict(q) for q in bank.questions],
    }
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


@dataclass(frozen=True)
class PresentedQuestion:
    """Client-facing question view: opaque tokens, no answer data.

    ``options``/``items``/``categories`` are populated per question type;
    display order of options/items is a seeded permutation of the authored
    order.
    """

    task_id: str
    prompt: str
    qtype: str
    options: tuple[dict, ...] = ()     # multiple_choice: {token, text}
    items: tuple[dict, ...] = ()       # ordering/classification: {token, text}
    categories: tuple[str, ...] = ()   # classification: names, authored order

    def to_payload(self) -> dict:
        out: dict = {"taskId": self.task_id, "prompt": self.prompt, "qtype": self.qtype}
        if self.qtype == "multiple_choice":
            out["options"] = [dict(o) for o in self.options]
        elif self.qtype == "ordering":
            out["items"] = [dict(i) for i in self.items]
        elif self.qtype == "classification":
            out["categories"] = list(self.categories)
            out["items"] = [dict(i) for i in self.items]
        return out


def present_question(q: Question, task_id: str, rng_seed: int) -> tuple[PresentedQuestion, TokenMap]:
    """Build the answer-hidden presentation of ``q``.

    Deterministic in (q, task_id, rng_seed): the same triple always yields
    the same tokens and display permutation. Tokens are unique within one
    presentation and the returned TokenMap inverts them to authored indices.
    """
    rng = random.Random(f"{rng_seed}:{task_id}:{q.id}")
    body = q.body

    def fresh_tokens(n: int) -> list[str]:
        toks: list[str] = []
        seen: set[str] = set()
        while len(toks) < n:
            t = f"{rng.getrandbits(32):0{TOKEN_HEX_LEN}x}"
            if t not in seen:
                seen.add(t)
                toks.append(t)
        return toks

    if isinstance(body, Numeric):
        return PresentedQuestion(task_id=task_id, prompt=q.prompt, qtype=body.kind), {}

    if isinstance(body, MultipleChoice):
        texts = list(body.options)
    elif isinstance(body, Ordering):
        texts = list(body.items)
    else:
        texts = [t for t, _ in body.items]

    n = len(texts)
    tokens = fresh_tokens(n)
    perm = list(range(n))
    rng.shuffle(perm)

    token_map: TokenMap = {}
    entries = []
    for display_pos, authored_idx in enumerate(perm):
        tok = tokens[display_pos]
        token_map[tok] = authored_idx
        entries.append({"token": tok, "text": texts[authored_idx]})

    if isinstance(body, MultipleChoice):
        presented = PresentedQuestion(task_id=task_id, prompt=q.prompt, qtype=body.kind,
                                      options=tuple(entries))
    elif isinstance(body, Ordering):
        presented = PresentedQuestion(task_id=task_id, prompt=q.prompt, qtype=body.kind,
                                      items=tuple(entries))
    else:
        presented = PresentedQuestion(task_id=task_id, prompt=q.prompt, qtype=body.kind,
                                      items=tuple(entries), categories=body.categories)
    return presented, token_map
