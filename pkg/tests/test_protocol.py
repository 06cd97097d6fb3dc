import json
import random

import pytest

from spacerace import protocol as p
from spacerace.protocol import (
    AdminRole,
    NotJson,
    PlayerRole,
    SchemaViolation,
    Unbound,
    UnknownType,
    WireMessage,
    decode_message,
    encode_message,
    legal_in_session,
    submission_from_doc,
)

from .msg_gen import sample_message, sample_payload_doc


def wire(type_name: str, seq: int, payload: dict) -> bytes:
    return json.dumps({"type": type_name, "seq": seq, "payload": payload}).encode()


class TestDecode:
    def test_valid_join(self):
        m = decode_message(wire("join", 1, {"gameCode": "ABCDEF", "name": "ana"}))
        assert m.type == "join" and m.seq == 1
        assert m.payload.gameCode == "ABCDEF"

    def test_bad_direction_enum(self):
        with pytest.raises(SchemaViolation) as exc:
            decode_message(wire("move", 1, {"dir": "north"}))
        assert "dir" in exc.value.field

    def test_unknown_type(self):
        with pytest.raises(UnknownType):
            decode_message(wire("warp", 1, {}))

    def test_not_json(self):
        with pytest.raises(NotJson):
            decode_message(b"\x00{nope")
        with pytest.raises(NotJson):
            decode_message(b'["array", "not", "object"]')

    def test_missing_seq(self):
        with pytest.raises(SchemaViolation) as exc:
            decode_message(json.dumps({"type": "interact", "payload": {}}).encode())
        assert exc.value.field == "seq"

    @pytest.mark.parametrize("bad_seq", ["5", 1.5, -1, True, None])
    def test_bad_seq(self, bad_seq):
        with pytest.raises(SchemaViolation):
            decode_message(json.dumps(
                {"type": "interact", "seq": bad_seq, "payload": {}}).encode())

    def test_missing_payload(self):
        with pytest.raises(SchemaViolation) as exc:
            decode_message(json.dumps({"type": "interact", "seq": 1}).encode())
        assert exc.value.field == "payload"

    def test_mistyped_string_field(self):
        with pytest.raises(SchemaViolation) as exc:
            decode_message(wire("join", 1, {"gameCode": 123, "name": "x"}))
        assert "gameCode" in exc.value.field

    def test_numeric_submission_rejects_string(self):
        with pytest.raises(SchemaViolation):
            decode_message(wire("answer", 1, {
                "taskId": "t0", "submission": {"kind": "numeric", "value": "42"}}))

    def test_numeric_submission_rejects_nan(self):
        with pytest.raises(SchemaViolation):
            decode_message(wire("answer", 1, {
                "taskId": "t0", "submission": {"kind": "numeric", "value": float("inf")}}))

    def test_numeric_submission_accepts_integer(self):
        m = decode_message(wire("answer", 1, {
            "taskId": "t0", "submission": {"kind": "numeric", "value": 42}}))
        assert m.payload.submission.value == 42.0


class TestEncode:
    def test_move_payload_lowercase(self):
        m = decode_message(wire("move", 3, {"dir": "up"}))
        assert encode_message(m) == b'{"type":"move","seq":3,"payload":{"dir":"up"}}'

    def test_no_newlines(self):
        rng = random.Random(1)
        for _ in range(50):
            assert b"\n" not in encode_message(sample_message(rng))

    def test_canonical_fixed_point(self):
        rng = random.Random(2)
        for _ in range(200):
            m = sample_message(rng)
            canonical = encode_message(m)
            assert encode_message(decode_message(canonical)) == canonical


class TestRoundTripProperty:
    def test_full_vocabulary_round_trip(self):
        rng = random.Random(42)
        seen = set()
        for _ in range(2000):
            m = sample_message(rng)
            seen.add(m.type)
            again = decode_message(encode_message(m))
            assert again == m, m.type
        assert seen == set(p.ALL_PAYLOADS), "generator must exercise every type"


class TestStrictnessPerType:
    """Missing/mistyped declared fields rejected; extra fields ignored."""

    WRONG = {str: 123, int: "xx", float: "xx", bool: "xx", list: {"zz": 1}, dict: [1]}

    @pytest.mark.parametrize("type_name", sorted(p.ALL_PAYLOADS))
    def test_required_field_removal_rejected(self, type_name):
        rng = random.Random(f"strict:{type_name}")
        model = p.ALL_PAYLOADS[type_name]
        doc = {k: v for k, v in sample_payload_doc(type_name, rng).items() if v is not None}
        decode_message(wire(type_name, 1, doc))  # sanity: valid as-is
        for fname, finfo in model.model_fields.items():
            if not finfo.is_required() or fname not in doc:
                continue
            broken = {k: v for k, v in doc.items() if k != fname}
            with pytest.raises(SchemaViolation):
                decode_message(wire(type_name, 1, broken))

    @pytest.mark.parametrize("type_name", sorted(p.ALL_PAYLOADS))
    def test_mistyped_field_rejected(self, type_name):
        rng = random.Random(f"strict:{type_name}")
        doc = {k: v for k, v in sample_payload_doc(type_name, rng).items() if v is not None}
        for fname, value in doc.items():
            broken = dict(doc)
            broken[fname] = self.WRONG[type(value)]
            with pytest.raises(SchemaViolation):
                decode_message(wire(type_name, 1, broken))

    @pytest.mark.parametrize("type_name", sorted(p.ALL_PAYLOADS))
    def test_extra_fields_ignored(self, type_name):
        rng = random.Random(f"strict:{type_name}")
        doc = {k: v for k, v in sample_payload_doc(type_name, rng).items() if v is not None}
        reference = decode_message(wire(type_name, 1, doc))
        doc_extra = dict(doc, zzUnknownField={"future": True})
        assert decode_message(wire(type_name, 1, doc_extra)).payload == reference.payload


class TestSubmissionConversion:
    def test_multiple_choice(self):
        doc = p.MultipleChoiceSubmissionDoc(kind="multiple_choice", selected=["a", "b"])
        sub = submission_from_doc(doc)
        assert sub.selected_tokens == frozenset({"a", "b"})

    def test_ordering_preserves_order(self):
        doc = p.OrderingSubmissionDoc(kind="ordering", order=["d", "a", "c", "b"])
        assert submission_from_doc(doc).ordered_tokens == ("d", "a", "c", "b")

    def test_classification(self):
        doc = p.ClassificationSubmissionDoc(
            kind="classification", assignments={"x": 0, "y": 1})
        assert dict(submission_from_doc(doc).assignments) == {"x": 0, "y": 1}


class TestSessionLegality:
    def _msg(self, type_name, seq=1):
        rng = random.Random(0)
        doc = {k: v for k, v in sample_payload_doc(type_name, rng).items() if v is not None}
        return decode_message(wire(type_name, seq, doc))

    def test_player_sends_admin_end(self):
        role = PlayerRole(game_code="ABCDEF", player_id="p0")
        assert legal_in_session(role, "running", self._msg("admin_end")) == "role"

    def test_unbound_sends_move(self):
        assert legal_in_session(Unbound(), None, self._msg("move")) == "role"

    def test_seq_not_increasing(self):
        role = PlayerRole(game_code="ABCDEF", player_id="p0")
        assert legal_in_session(role, "running", self._msg("move", seq=5), last_seq=5) == "seq"
        assert legal_in_session(role, "running", self._msg("move", seq=4), last_seq=5) == "seq"
        assert legal_in_session(role, "running", self._msg("move", seq=6), last_seq=5) is None

    def test_unbound_may_join_or_create(self):
        for t in ("join", "resume", "admin_create_game", "admin_subscribe"):
            assert legal_in_session(Unbound(), None, self._msg(t)) is None

    def test_bound_player_may_not_rejoin(self):
        role = PlayerRole(game_code="ABCDEF", player_id="p0")
        assert legal_in_session(role, "lobby", self._msg("join")) == "role"

    def test_admin_commands_allowed_for_admin(self):
        role = AdminRole(game_code="ABCDEF", token="tok")
        for t in ("admin_load_bank", "admin_start", "admin_end"):
            assert legal_in_session(role, "lobby", self._msg(t)) is None

    def test_phase_gating(self):
        role = PlayerRole(game_code="ABCDEF", player_id="p0")
        assert legal_in_session(role, "lobby", self._msg("move")) == "phase"
        assert legal_in_session(role, "running", self._msg("select_team")) == "phase"
        assert legal_in_session(role, "lobby", self._msg("select_team")) is None
        assert legal_in_session(role, None, self._msg("move")) is None  # no hint, engine decides

    def test_client_cannot_send_server_types(self):
        role = PlayerRole(game_code="ABCDEF", player_id="p0")
        assert legal_in_session(role, "running", self._msg("game_over")) == "role"


class TestVocabulary:
    def test_closed_vocabulary_sizes(self):
        assert len(p.CLIENT_PAYLOADS) == 12
        assert len(p.SERVER_PAYLOADS) == 15
        assert not set(p.CLIENT_PAYLOADS) & set(p.SERVER_PAYLOADS)

    def test_schema_rows_cover_everything(self):
        rows = p.schema_rows()
        names = {r[1] for r in rows}
        assert names == set(p.ALL_PAYLOADS)

    def test_docs_table_in_sync(self):
        """The protocol doc must list every message type with its fields."""
        from pathlib import Path
        doc = Path(__file__).parent.parent / "docs" / "protocol.md"
        text = doc.read_text(encoding="utf-8")
        for direction, name, fields in p.schema_rows():
            row = next((line for line in text.splitlines()
                        if line.startswith(f"| {name} |")), None)
            assert row is not None, f"docs/protocol.md missing row for {name}"
            for fname in fields.replace("(empty)", "").split(", "):
                if fname:
                    assert fname in row, f"{name}: field {fname} missing from doc row"
