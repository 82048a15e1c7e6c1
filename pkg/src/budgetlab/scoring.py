"""Answer extraction, normalization, voting and exact-match scoring."""

from __future__ import annotations

import re
from collections import Counter
from fractions import Fraction
from math import floor
from typing import Iterable, Sequence

BOXED = "\\boxed{"
_FINAL_ANSWER = re.compile(r"final\s+answer(?:\s+is)?\s*:?", re.IGNORECASE)
_INTEGER = re.compile(r"^[+-]?\d+$")


def _balanced_group(text: str, open_at: int) -> str | None:
    """Content of the brace group whose ``{`` sits at ``open_at``, or None if unclosed."""
    depth = 0
    for i in range(open_at, len(text)):
        ch = text[i]
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[open_at + 1:i]
    return None


def extract_answer(text: str) -> str | None:
    """Last balanced ``\\boxed{...}``; else whatever follows the last "final answer" marker."""
    if not text:
        return None
    at = text.rfind(BOXED)
    while at != -1:
        content = _balanced_group(text, at + len(BOXED) - 1)
        if content is not None:
            answer = normalize(content)
            return answer or None
        at = text.rfind(BOXED, 0, at)
    markers = list(_FINAL_ANSWER.finditer(text))
    if markers:
        tail = text[markers[-1].end():].strip()
        line = tail.splitlines()[0] if tail else ""
        line = line.strip().strip("*").strip().rstrip(".").strip()
        answer = normalize(line)
        return answer or None
    return None


def normalize(answer: str) -> str:
    s = answer.strip().strip("$").strip()
    if _INTEGER.match(s):
        return str(int(s))
    return s


def majority_vote(candidates: Iterable[tuple[int, str | None]]) -> str | None:
    """Modal answer; ties go to the answer first seen at the lowest trace index."""
    present = [(i, a) for i, a in candidates if a is not None]
    if not present:
        return None
    counts = Counter(a for _, a in present)
    top = max(counts.values())
    first_seen: dict[str, int] = {}
    for i, a in present:
        first_seen[a] = min(i, first_seen.get(a, i))
    modal = [a for a, c in counts.items() if c == top]
    return min(modal, key=lambda a: first_seen[a])


def score(predicted: str | None, gold: str) -> bool:
    if not gold:
        raise ValueError("gold answer must be non-empty")
    return predicted is not None and normalize(predicted) == normalize(gold)


def accuracy(results: Sequence[bool]) -> float:
    """Percentage correct, rounded half-up to two decimals."""
    if not results:
        raise ValueError("accuracy of an empty result list is undefined")
    exact = Fraction(100 * sum(bool(r) for r in results), len(results))
    return floor(exact * 100 + Fraction(1, 2)) / 100


def format_pct(value: float) -> str:
    return f"{value:.2f}"


EXTRACTION_PROMPT = (
    "Extract the final answer from the following solution. "
    "Reply with the answer only, inside \\boxed{{}}.\n\n{text}"
)


def llm_extract(backend, text: str, *, max_tokens: int = 64) -> str | None:
    """Optional extraction through a zero-think model call; off by default in the harness."""
    from .backend.base import GenerationRequest, collect

    request = GenerationRequest(
        messages=(("user", EXTRACTION_PROMPT.format(text=text)),),
        max_tokens=max_tokens,
        enable_thinking=False,
    )
    reply = collect(backend.generate(request)).answer_text
    return extract_answer(reply) or (normalize(reply) or None)
