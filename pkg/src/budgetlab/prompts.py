"""Prompt templates used by the strategies, with plain-text directory overrides."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .core import ValidationError

ASSISTANT_SYSTEM = "You are a helpful assistant tasked to answer user's questions"

SUMMARY_TEMPLATE = (
    "Given this question\n"
    "{q}\n"
    "we have a set of potential answers:\n"
    "{docs}\n"
    "Take these and distill it into a final, consolidated answer."
)

REFLECTION_SYSTEM = (
    "You are a helpful assistant tasked to solve puzzles. "
    "If the user provides feedback, respond again a revised version of your previous attempts. "
    "DO NOT thank for the feedback. Pretend it's the first time you are answering the question. "
)

REFLECTION_GRADER_SYSTEM = (
    "You are a helpful assistant able to grade answers. "
    "Check correctness of the user's answer. "
    "Provide feedback and detailed recommendations, including requests for length, depth, etc.,"
)

JUDGE_SYSTEM = (
    "You are a strict grader. Decide whether the proposed answer to the question is correct. "
    "Reply with CORRECT or INCORRECT on the first line and nothing else on that line."
)


@dataclass(frozen=True)
class PromptSet:
    assistant_system: str = ASSISTANT_SYSTEM
    summary_template: str = SUMMARY_TEMPLATE
    reflection_system: str = REFLECTION_SYSTEM
    reflection_grader_system: str = REFLECTION_GRADER_SYSTEM
    judge_system: str = JUDGE_SYSTEM

    def __post_init__(self):
        for placeholder in ("{q}", "{docs}"):
            count = self.summary_template.count(placeholder)
            if count != 1:
                raise ValidationError(
                    f"summary_template must contain {placeholder} exactly once (found {count})"
                )

    def render_summary(self, question: str, answers: list[str]) -> str:
        docs = "\n\n".join(answers)
        # str.replace, not format: LaTeX braces in questions must survive
        head, tail = self.summary_template.split("{docs}")
        return head.replace("{q}", question) + docs + tail.replace("{q}", question)

    @classmethod
    def load_dir(cls, directory: str | Path) -> "PromptSet":
        """Read ``<field>.txt`` overrides from ``directory``; missing files keep the defaults."""
        directory = Path(directory)
        if not directory.is_dir():
            raise ValidationError(f"prompt directory {directory} does not exist")
        overrides = {}
        for f in fields(cls):
            path = directory / f"{f.name}.txt"
            if path.exists():
                overrides[f.name] = path.read_text(encoding="utf-8").rstrip("\n")
        return cls(**overrides)
