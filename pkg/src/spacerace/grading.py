"""Binary grading of player submissions.

Verdicts are correct/incorrect only: right answers are rewarded, wrong ones
carry no score penalty (the retry cooldown lives in the game engine, not
here). Submissions address options/items by presentation token; ``grade``
resolves tokens through the TokenMap issued with the presentation and
dispatches to the per-type grader.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence, Union

from .questions import (
    Classification,
    MultipleChoice,
    Numeric,
    Ordering,
    Question,
    TokenMap,
)


class Verdict(Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"


class GradingError(Exception):
    """Protocol-fault level problems with a submission (not wrong answers)."""


class TypeMismatch(GradingError):
    pass


class UnknownToken(GradingError):
    pass


class EmptySelection(GradingError):
    pass


class NonFiniteValue(GradingError):
    pass


class NotAPermutation(GradingError):
    pass


class IncompleteAssignment(GradingError):
    pass


@dataclass(frozen=True)
class MultipleChoiceSubmission:
    selected_tokens: frozenset[str]


@dataclass(frozen=True)
class NumericSubmission:
    value: float


@dataclass(frozen=True)
class OrderingSubmission:
    ordered_tokens: tuple[str, ...]


@dataclass(frozen=True)
class ClassificationSubmission:
    assignments: tuple[tuple[str, int], ...]  # (token, category 0|1)


Submission = Union[
    MultipleChoiceSubmission,
    NumericSubmission,
    OrderingSubmission,
    ClassificationSubmission,
]


def grade_multiple_choice(correct: frozenset[int] | set[int], selected: set[int]) -> Verdict:
    """Correct iff the selected set equals the authored correct set exactly."""
    if not selected:
        raise EmptySelection("selection must not be empty")
    return Verdict.CORRECT if set(selected) == set(correct) else Verdict.INCORRECT


def grade_numeric(answer: float, tolerance: float, value: float) -> Verdict:
    """Closed-interval comparison: correct iff |value - answer| <= tolerance."""
    if not math.isfinite(value):
        raise NonFiniteValue(f"submitted value {value!r} is not finite")
    return Verdict.CORRECT if abs(value - answer) <= tolerance else Verdict.INCORRECT


def grade_ordering(authored_order: Sequence[int], submitted_order: Sequence[int]) -> Verdict:
    """Correct iff the submission reproduces the authored order."""
    if sorted(submitted_order) != sorted(authored_order):
        raise NotAPermutation(f"{list(submitted_order)} is not a permutation of {list(authored_order)}")
    return Verdict.CORRECT if list(submitted_order) == list(authored_order) else Verdict.INCORRECT


def grade_classification(item_categories: Sequence[int], submitted: Mapping[int, int]) -> Verdict:
    """Correct iff every item is assigned to its authored category."""
    if set(submitted.keys()) != set(range(len(item_categories))):
        raise IncompleteAssignment(
            f"assignments must cover indices 0..{len(item_categories) - 1}")
    ok = all(submitted[i] == cat for i, cat in enumerate(item_categories))
    return Verdict.CORRECT if ok else Verdict.INCORRECT


def _resolve(token_map: TokenMap, token: str) -> int:
    try:
        return token_map[token]
    except KeyError:
        raise UnknownToken(f"token {token!r} does not belong to this presentation") from None


def grade(q: Question, token_map: TokenMap, submission: Submission) -> Verdict:
    """Resolve tokens and grade ``submission`` against ``q``.

    Raises TypeMismatch when the submission variant does not match the
    question type, UnknownToken for tokens outside the presentation, and the
    per-type faults (EmptySelection, NonFiniteValue, NotAPermutation,
    IncompleteAssignment) from the typed graders.
    """
    body = q.body
    if isinstance(body, MultipleChoice):
        if not isinstance(submission, MultipleChoiceSubmission):
            raise TypeMismatch(f"expected multiple_choice submission, got {type(submission).__name__}")
        if not submission.selected_tokens:
            raise EmptySelection("selection must not be empty")
        selected = {_resolve(token_map, t) for t in submission.selected_tokens}
        return grade_multiple_choice(body.correct, selected)

    if isinstance(body, Numeric):
        if not isinstance(submission, NumericSubmission):
            raise TypeMismatch(f"expected numeric submission, got {type(submission).__name__}")
        return grade_numeric(body.answer, body.tolerance, submission.value)

    if isinstance(body, Ordering):
        if not isinstance(submission, OrderingSubmission):
            raise TypeMismatch(f"expected ordering submission, got {type(submission).__name__}")
        indices = [_resolve(token_map, t) for t in submission.ordered_tokens]
        if len(set(submission.ordered_tokens)) != len(submission.ordered_tokens):
            raise NotAPermutation("ordered tokens contain duplicates")
        return grade_ordering(list(range(len(body.items))), indices)

    if isinstance(body, Classification):
        if not isinstance(submission, ClassificationSubmission):
            raise TypeMismatch(f"expected classification submission, got {type(submission).__name__}")
        assigned: dict[int, int] = {}
        for token, cat in submission.assignments:
            idx = _resolve(token_map, token)
            if idx in assigned:
                raise IncompleteAssignment(f"item {idx} assigned twice")
            assigned[idx] = cat
        return grade_classification([c for _, c in body.items], assigned)

    raise TypeMismatch(f"unknown question body {type(body).__name__}")  # pragma: no cover
