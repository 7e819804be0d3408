"""Dataset validation: schema enforcement, statistics, token estimates."""

import json
import math

import pytest

from lppa_finetune.dataset import (
    ENTITY_TYPES,
    HISTOGRAM_BIN,
    estimate_tokens,
    validate_dataset,
)
from lppa_finetune.errors import SchemaError


def record(system="You label PHI.", user="note text", assistant='{"PERSON": ["Ann"]}'):
    return {
        "messages": [
            {"role": "system", "content": system},
            {"role": "user", "content": user},
            {"role": "assistant", "content": assistant},
        ]
    }


def write(tmp_path, payloads, name="data.jsonl"):
    path = tmp_path / name
    path.write_text(
        "".join(json.dumps(p) + "\n" for p in payloads), encoding="utf-8"
    )
    return path


class TestHappyPath:
    def test_counts_and_histogram(self, small_dataset):
        stats = validate_dataset(small_dataset)
        assert stats.n_records == 3
        assert sum(stats.token_histogram.values()) == 3
        assert all(bucket % HISTOGRAM_BIN == 0 for bucket in stats.token_histogram)
        assert stats.n_over_seq_len == 0

    def test_over_length_counted(self, tmp_path):
        long_user = "x" * 4000  # ~1000 tokens, over a 512 cap
        path = write(tmp_path, [record(), record(user=long_user)])
        stats = validate_dataset(path, seq_len=512)
        assert stats.n_records == 2
        assert stats.n_over_seq_len == 1

    def test_empty_file_warns(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.warns(UserWarning, match="empty"):
            stats = validate_dataset(path)
        assert stats.n_records == 0
        assert stats.token_histogram == {}

    def test_every_entity_type_accepted(self, tmp_path):
        assistant = json.dumps({t: ["x"] for t in ENTITY_TYPES})
        path = write(tmp_path, [record(assistant=assistant)])
        assert validate_dataset(path).n_records == 1

    def test_stats_as_dict_shape(self, small_dataset):
        data = validate_dataset(small_dataset).as_dict()
        assert set(data) == {"n_records", "token_histogram", "n_over_seq_len"}


class TestSchemaErrors:
    def test_invalid_json_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(record()) + "\n{nope\n")
        with pytest.raises(SchemaError, match="line 2") as info:
            validate_dataset(path)
        assert info.value.lineno == 2

    def test_blank_line_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(record()) + "\n\n")
        with pytest.raises(SchemaError, match="line 2: blank"):
            validate_dataset(path)

    def test_missing_messages_key(self, tmp_path):
        path = write(tmp_path, [{"msgs": []}])
        with pytest.raises(SchemaError, match="'messages'"):
            validate_dataset(path)

    def test_two_messages_rejected(self, tmp_path):
        bad = record()
        bad["messages"] = bad["messages"][:2]  # assistant turn dropped
        path = write(tmp_path, [record(), bad])
        with pytest.raises(SchemaError, match="line 2: expected exactly 3"):
            validate_dataset(path)

    def test_wrong_role_order(self, tmp_path):
        bad = record()
        bad["messages"][0], bad["messages"][1] = bad["messages"][1], bad["messages"][0]
        path = write(tmp_path, [bad])
        with pytest.raises(SchemaError, match="expected role 'system'"):
            validate_dataset(path)

    def test_extra_message_keys_rejected(self, tmp_path):
        bad = record()
        bad["messages"][0]["name"] = "sys"
        path = write(tmp_path, [bad])
        with pytest.raises(SchemaError, match="exactly 'role' and 'content'"):
            validate_dataset(path)

    def test_empty_content_rejected(self, tmp_path):
        path = write(tmp_path, [record(user="")])
        with pytest.raises(SchemaError, match="user content"):
            validate_dataset(path)

    def test_assistant_not_json(self, tmp_path):
        path = write(tmp_path, [record(assistant="PERSON: Ann")])
        with pytest.raises(SchemaError, match="assistant content is not valid JSON"):
            validate_dataset(path)

    def test_assistant_not_object(self, tmp_path):
        path = write(tmp_path, [record(assistant='["PERSON"]')])
        with pytest.raises(SchemaError, match="JSON object"):
            validate_dataset(path)

    def test_unknown_entity_type(self, tmp_path):
        path = write(tmp_path, [record(assistant='{"NAME": ["Ann"]}')])
        with pytest.raises(SchemaError, match="unknown entity type 'NAME'"):
            validate_dataset(path)

    def test_mentions_must_be_nonempty_strings(self, tmp_path):
        for bad in ('{"PERSON": "Ann"}', '{"PERSON": [""]}', '{"PERSON": [1]}'):
            path = write(tmp_path, [record(assistant=bad)])
            with pytest.raises(SchemaError, match="mentions"):
                validate_dataset(path)


class TestTokenEstimate:
    @pytest.mark.parametrize("n", [0, 1, 3, 4, 5, 100])
    def test_ceiling_rule(self, n):
        assert estimate_tokens("x" * n) == math.ceil(n / 4)
