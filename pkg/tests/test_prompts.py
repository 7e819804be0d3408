"""Prompt builders against the golden assets (byte-for-byte)."""

import json
from importlib import resources
from types import SimpleNamespace

import pytest

from lppa.entities import ENTITY_TYPES
from lppa.prompts import (
    ChatRequest,
    build_aeg_prompt,
    build_spi_prompt,
    build_task_prompt,
)

GOLDEN = resources.files("lppa") / "assets" / "golden"


def golden_text(name: str) -> str:
    return (GOLDEN / name).read_text(encoding="utf-8")


def demo_record() -> SimpleNamespace:
    # SimpleNamespace on purpose: the builders are duck-typed, and using the
    # real StructuredRecord here would retest the pipeline, not the template.
    return SimpleNamespace(**json.loads(golden_text("demo_record.json")))


def demo_identity() -> SimpleNamespace:
    return SimpleNamespace(**json.loads(golden_text("demo_identity.json")))


class TestTaskPrompt:
    def test_matches_golden_bytes(self):
        req = build_task_prompt(golden_text("demo_note.txt"))
        assert req.system == golden_text("task_system.txt")
        assert req.user == golden_text("task_user.txt")

    def test_note_appended_after_final_marker(self):
        req = build_task_prompt("X")
        assert req.user.endswith("Here is the clinical note:\nX")

    def test_recall_instruction_present(self):
        req = build_task_prompt("X")
        assert "focus on ensuring no relevant entities are missing" in req.user

    def test_lists_twelve_types_in_order(self):
        req = build_task_prompt("X")
        listed = json.loads(req.user[req.user.index("[") : req.user.index("]") + 1])
        assert listed == list(ENTITY_TYPES)

    def test_template_fixed_only_note_varies(self):
        a, b = build_task_prompt("AAA"), build_task_prompt("BBB")
        assert a.user[: -len("AAA")] == b.user[: -len("BBB")]

    def test_empty_note_rejected(self):
        with pytest.raises(ValueError):
            build_task_prompt("")

    def test_annotation_defaults(self):
        req = build_task_prompt("X")
        assert req.temperature == 0.0
        assert req.max_output_tokens >= 256


class TestAegPrompt:
    def test_matches_golden_bytes(self):
        req = build_aeg_prompt(1)
        assert req.system == golden_text("aeg_system.txt")
        assert req.user == golden_text("aeg_user.txt")

    def test_extraction_sentence_present(self):
        req = build_aeg_prompt()
        assert (
            "extract all PHI entities within the simulated clinical notes and "
            "store them in a dictionary" in req.system
        )

    def test_both_person_special_cases(self):
        sys_msg = build_aeg_prompt().system
        assert "'Dr. John', you should only extract 'John'" in sys_msg
        assert "'Mr. John', you should take 'Mr. John'" in sys_msg

    def test_deterministic(self):
        assert build_aeg_prompt() == build_aeg_prompt()

    def test_one_note_per_call_enforced(self):
        with pytest.raises(ValueError):
            build_aeg_prompt(5)


class TestSpiPrompt:
    def test_matches_golden_bytes(self):
        req = build_spi_prompt(demo_record(), demo_identity(), golden_text("demo_exemplar.txt"))
        assert req.system == golden_text("spi_system.txt")
        assert req.user == golden_text("spi_user.txt")

    def test_section_markers_present(self):
        req = build_spi_prompt(demo_record(), demo_identity(), "EX")
        for marker in ("<INFORMATION>", "<END OF INFORMATION>", "<EXAMPLE>", "<END OF EXAMPLE>"):
            assert marker in req.user

    def test_extraction_instruction_present(self):
        req = build_spi_prompt(demo_record(), demo_identity(), "EX")
        assert "extract all PHI entities within the note and store them in a JSON" in req.user

    def test_identity_fields_rendered_verbatim(self):
        ident = demo_identity()
        req = build_spi_prompt(demo_record(), ident, "EX")
        info = req.user.split("<END OF INFORMATION>")[0]
        assert ident.name in info
        assert ident.phone in info
        assert ident.address in info

    def test_email_domain_instruction_kept(self):
        req = build_spi_prompt(demo_record(), demo_identity(), "EX")
        assert "The email domain name must be a real one." in req.user

    def test_exemplar_inside_example_block(self):
        req = build_spi_prompt(demo_record(), demo_identity(), "UNIQUE-EXEMPLAR")
        block = req.user.split("<EXAMPLE>\n")[1].split("\n<END OF EXAMPLE>")[0]
        assert block == "UNIQUE-EXEMPLAR"

    def test_generation_sampling_defaults(self):
        req = build_spi_prompt(demo_record(), demo_identity(), "EX")
        assert req.temperature == 1.0
        assert req.max_output_tokens >= 1024

    def test_blank_exemplar_rejected(self):
        with pytest.raises(ValueError):
            build_spi_prompt(demo_record(), demo_identity(), "  ")


class TestChatRequest:
    def test_rejects_empty_messages(self):
        with pytest.raises(ValueError):
            ChatRequest(system="", user="u")
        with pytest.raises(ValueError):
            ChatRequest(system="s", user="")

    def test_rejects_negative_temperature(self):
        with pytest.raises(ValueError):
            ChatRequest(system="s", user="u", temperature=-0.1)
