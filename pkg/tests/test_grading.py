import itertools
import random

import pytest

from spacerace import grading
from spacerace.grading import (
    ClassificationSubmission,
    EmptySelection,
    IncompleteAssignment,
    MultipleChoiceSubmission,
    NonFiniteValue,
    NotAPermutation,
    NumericSubmission,
    OrderingSubmission,
    TypeMismatch,
    UnknownToken,
    Verdict,
    grade,
    grade_classification,
    grade_multiple_choice,
    grade_numeric,
    grade_ordering,
)
from spacerace.questions import present_question

from .helpers import classification, mc, num, ordering


class TestMultipleChoice:
    def test_exact_match(self):
        assert grade_multiple_choice({0, 2}, {0, 2}) is Verdict.CORRECT

    def test_strict_subset_is_incorrect(self):
        assert grade_multiple_choice({0, 2}, {0}) is Verdict.INCORRECT

    def test_superset_is_incorrect(self):
        assert grade_multiple_choice({0, 2}, {0, 1, 2}) is Verdict.INCORRECT

    def test_empty_selection_rejected(self):
        with pytest.raises(EmptySelection):
            grade_multiple_choice({0}, set())

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_exactly_one_correct_selection(self, n):
        # Enumerate every non-empty selection; exactly one must grade correct.
        rng = random.Random(n)
        correct = set(rng.sample(range(n), rng.randint(1, n)))
        selections = []
        for r in range(1, n + 1):
            selections.extend(set(c) for c in itertools.combinations(range(n), r))
        assert len(selections) == 2 ** n - 1
        wins = [s for s in selections if grade_multiple_choice(correct, s) is Verdict.CORRECT]
        assert wins == [correct]


class TestNumeric:
    def test_exact(self):
        assert grade_numeric(42, 0, 42) is Verdict.CORRECT

    def test_within_tolerance(self):
        assert grade_numeric(42, 0.5, 41.6) is Verdict.CORRECT

    def test_outside_tolerance(self):
        assert grade_numeric(42, 0.5, 41.4) is Verdict.INCORRECT

    @pytest.mark.parametrize("answer,tol", [(42.0, 0.5), (0.0, 1.25), (-7.5, 2.0)])
    def test_closed_interval_boundaries(self, answer, tol):
        assert grade_numeric(answer, tol, answer + tol) is Verdict.CORRECT
        assert grade_numeric(answer, tol, answer - tol) is Verdict.CORRECT

    def test_non_finite_value(self):
        for bad in (float("nan"), float("inf"), float("-inf")):
            with pytest.raises(NonFiniteValue):
                grade_numeric(1.0, 0.0, bad)


class TestOrdering:
    def test_identity_correct(self):
        assert grade_ordering([0, 1, 2, 3], [0, 1, 2, 3]) is Verdict.CORRECT

    def test_single_swap_incorrect(self):
        assert grade_ordering([0, 1, 2, 3], [1, 0, 2, 3]) is Verdict.INCORRECT

    def test_exactly_one_of_24_permutations(self):
        wins = [p for p in itertools.permutations(range(4))
                if grade_ordering([0, 1, 2, 3], list(p)) is Verdict.CORRECT]
        assert wins == [(0, 1, 2, 3)]

    def test_not_a_permutation(self):
        with pytest.raises(NotAPermutation):
            grade_ordering([0, 1, 2, 3], [0, 1, 2, 2])
        with pytest.raises(NotAPermutation):
            grade_ordering([0, 1, 2, 3], [0, 1, 2])


class TestClassification:
    def test_exact_assignment(self):
        assert grade_classification([0, 1, 0, 1], {0: 0, 1: 1, 2: 0, 3: 1}) is Verdict.CORRECT

    def test_one_flip_incorrect(self):
        assert grade_classification([0, 1, 0, 1], {0: 1, 1: 1, 2: 0, 3: 1}) is Verdict.INCORRECT

    def test_exactly_one_of_16_assignments(self):
        authored = [0, 1, 1, 0]
        wins = []
        for bits in itertools.product((0, 1), repeat=4):
            assignment = dict(enumerate(bits))
            if grade_classification(authored, assignment) is Verdict.CORRECT:
                wins.append(bits)
        assert wins == [(0, 1, 1, 0)]

    def test_incomplete_assignment(self):
        with pytest.raises(IncompleteAssignment):
            grade_classification([0, 1, 0, 1], {0: 0, 1: 1})


def _correct_submission(q, presented, token_map):
    """Build the provably correct submission straight from authored data."""
    body = q.body
    if body.kind == "multiple_choice":
        toks = {t for t, idx in token_map.items() if idx in body.correct}
        return MultipleChoiceSubmission(selected_tokens=frozenset(toks))
    if body.kind == "numeric":
        return NumericSubmission(value=body.answer)
    if body.kind == "ordering":
        by_idx = {idx: t for t, idx in token_map.items()}
        return OrderingSubmission(ordered_tokens=tuple(by_idx[i] for i in range(4)))
    by_idx = {idx: t for t, idx in token_map.items()}
    return ClassificationSubmission(
        assignments=tuple((by_idx[i], cat) for i, (_, cat) in enumerate(body.items)))


class TestGradeDispatch:
    def test_type_mismatch(self):
        q = mc()
        _, token_map = present_question(q, "t0", 1)
        with pytest.raises(TypeMismatch):
            grade(q, token_map, NumericSubmission(value=1.0))

    def test_stale_token(self):
        q = mc()
        _, old_map = present_question(q, "t0", 1)
        _, new_map = present_question(q, "t0", 2)
        stale = next(iter(old_map))
        assert stale not in new_map
        with pytest.raises(UnknownToken):
            grade(q, new_map, MultipleChoiceSubmission(selected_tokens=frozenset({stale})))

    def test_duplicate_ordering_tokens(self):
        q = ordering()
        _, token_map = present_question(q, "t0", 1)
        tok = next(iter(token_map))
        with pytest.raises(NotAPermutation):
            grade(q, token_map, OrderingSubmission(ordered_tokens=(tok, tok, tok, tok)))

    def test_double_assignment_same_item(self):
        q = classification()
        _, token_map = present_question(q, "t0", 1)
        toks = list(token_map)
        with pytest.raises(IncompleteAssignment):
            grade(q, token_map, ClassificationSubmission(
                assignments=((toks[0], 0), (toks[0], 1), (toks[1], 0), (toks[2], 1))))

    def test_agreement_with_typed_graders_on_randomized_cases(self):
        # Oracle: resolve tokens by hand and call the typed grader directly;
        # grade() through the token map must agree on every case.
        rng = random.Random(2024)
        cases = 0
        for i in range(100):
            q = rng.choice([
                mc(options=tuple(f"o{j}" for j in range(rng.randint(2, 6))),
                   correct=(0,)),
                num(answer=rng.uniform(-50, 50), tolerance=rng.uniform(0, 2)),
                ordering(),
                classification(),
            ])
            if q.body.kind == "multiple_choice":
                n = len(q.body.options)
                q = mc(options=q.body.options,
                       correct=tuple(rng.sample(range(n), rng.randint(1, n))))
            presented, token_map = present_question(q, f"t{i}", i)
            body = q.body
            if body.kind == "multiple_choice":
                pool = list(token_map)
                picked = rng.sample(pool, rng.randint(1, len(pool)))
                sub = MultipleChoiceSubmission(selected_tokens=frozenset(picked))
                expected = grade_multiple_choice(body.correct, {token_map[t] for t in picked})
            elif body.kind == "numeric":
                value = rng.uniform(-55, 55)
                sub = NumericSubmission(value=value)
                expected = grade_numeric(body.answer, body.tolerance, value)
            elif body.kind == "ordering":
                toks = list(token_map)
                rng.shuffle(toks)
                sub = OrderingSubmission(ordered_tokens=tuple(toks))
                expected = grade_ordering(list(range(4)), [token_map[t] for t in toks])
            else:
                assignment = {t: rng.randint(0, 1) for t in token_map}
                sub = ClassificationSubmission(assignments=tuple(sorted(assignment.items())))
                expected = grade_classification(
                    [c for _, c in body.items],
                    {token_map[t]: v for t, v in assignment.items()})
            assert grade(q, token_map, sub) is expected
            cases += 1
        assert cases == 100

    @pytest.mark.parametrize("q", [mc(), num(), ordering(), classification()])
    def test_correct_submission_grades_correct(self, q):
        presented, token_map = present_question(q, "t0", 77)
        sub = _correct_submission(q, presented, token_map)
        assert grade(q, token_map, sub) is Verdict.CORRECT

    def test_determinism(self):
        q = ordering()
        _, token_map = present_question(q, "t0", 5)
        sub = _correct_submission(q, None, token_map)
        for _ in range(5):
            assert grade(q, token_map, sub) is Verdict.CORRECT
