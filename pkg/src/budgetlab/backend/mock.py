"""Deterministic scripted backend for offline runs and tests.

Script format, one rule per line, first match wins::

    # comment
    RULE <match> [SEED <int>] THINK <tok ...> ANSWER <tok ...>
    DEFAULT THINK <tok ...> ANSWER <tok ...>

``<match>`` is a substring searched for in the request's message texts; quote
it with double quotes when it contains spaces. A rule with ``SEED`` only
matches requests carrying that seed. ``DEFAULT`` must be the last rule.

Tokens are whitespace-delimited test units, not model tokens. ``word*N``
expands to ``N`` copies of ``word``. A literal ``</think>`` inside the THINK
list marks the points where the scripted model closes its reasoning; the end
of the list is an implicit closure.

On a continuation request the mock resumes its think list at the position
equal to the number of prefix tokens after ``<think>``. An injected one-token
filler therefore takes the slot of the rejected closure.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .base import (
    THINK_CLOSE,
    THINK_OPEN,
    FinishReason,
    GenerationChunk,
    GenerationRequest,
    Segment,
)

_REPEAT = re.compile(r"^(.+)\*(\d+)$")


class ScriptError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class MockRule:
    match: str | None
    think: tuple[str, ...]
    answer: tuple[str, ...]
    seed: int | None = None

    def matches(self, request: GenerationRequest) -> bool:
        if self.seed is not None and request.seed != self.seed:
            return False
        if self.match is None:
            return True
        return any(self.match in text for _, text in request.messages)


@dataclass(frozen=True)
class MockScript:
    rules: tuple[MockRule, ...]
    default: MockRule = MockRule(None, (), ())

    def select(self, request: GenerationRequest) -> MockRule:
        for rule in self.rules:
            if rule.matches(request):
                return rule
        return self.default

    @classmethod
    def parse(cls, text: str) -> "MockScript":
        rules: list[MockRule] = []
        default = None
        for lineno, line in enumerate(text.splitlines(), 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if default is not None:
                raise ScriptError("DEFAULT must be the final rule", lineno)
            head, _, rest = stripped.partition(" ")
            if head == "RULE":
                match, rest = _take_match(rest.lstrip(), lineno)
                seed = None
                if rest.startswith("SEED "):
                    _, seed_text, rest = rest.split(None, 2)
                    try:
                        seed = int(seed_text)
                    except ValueError:
                        raise ScriptError(f"bad SEED value {seed_text!r}", lineno) from None
                think, answer = _take_emissions(rest, lineno)
                rules.append(MockRule(match, think, answer, seed))
            elif head == "DEFAULT":
                think, answer = _take_emissions(rest.strip(), lineno)
                default = MockRule(None, think, answer)
            else:
                raise ScriptError(f"expected RULE or DEFAULT, got {head!r}", lineno)
        if default is None:
            raise ScriptError("script has no DEFAULT rule")
        return cls(tuple(rules), default)

    @classmethod
    def load(cls, path: str | Path) -> "MockScript":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def dump(self) -> str:
        lines = []
        for rule in self.rules:
            seed = f" SEED {rule.seed}" if rule.seed is not None else ""
            lines.append(
                f'RULE "{rule.match}"{seed} THINK {" ".join(rule.think)} ANSWER {" ".join(rule.answer)}'
            )
        d = self.default
        lines.append(f"DEFAULT THINK {' '.join(d.think)} ANSWER {' '.join(d.answer)}")
        return "\n".join(lines) + "\n"


def _take_match(rest: str, lineno: int) -> tuple[str, str]:
    if rest.startswith('"'):
        end = rest.find('"', 1)
        if end == -1:
            raise ScriptError("unterminated quoted match", lineno)
        return rest[1:end], rest[end + 1:].lstrip()
    match, _, rest = rest.partition(" ")
    if not match:
        raise ScriptError("RULE needs a match substring", lineno)
    return match, rest.lstrip()


def _expand(tokens: list[str]) -> tuple[str, ...]:
    out: list[str] = []
    for tok in tokens:
        m = _REPEAT.match(tok)
        if m:
            out.extend([m.group(1)] * int(m.group(2)))
        else:
            out.append(tok)
    return tuple(out)


def _take_emissions(rest: str, lineno: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
    tokens = rest.split()
    if not tokens or tokens[0] != "THINK" or "ANSWER" not in tokens:
        raise ScriptError("expected THINK <tok ...> ANSWER <tok ...>", lineno)
    cut = tokens.index("ANSWER")
    return _expand(tokens[1:cut]), _expand(tokens[cut + 1:])


@dataclass
class MockBackend:
    """Replays a ``MockScript``. Emits ``chunk_tokens`` test tokens per chunk."""

    script: MockScript
    chunk_tokens: int = 1
    requests: list[GenerationRequest] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def probe(self) -> None:
        pass

    def injection_tokens(self, text: str) -> int:
        return len(text.split())

    def generate(self, request: GenerationRequest) -> Iterator[GenerationChunk]:
        request.validate()
        with self._lock:
            self.requests.append(request)
        return self._emit(request, self.script.select(request))

    def _emit(self, request: GenerationRequest, rule: MockRule) -> Iterator[GenerationChunk]:
        prefix = request.assistant_prefix
        think: list[str] = []
        resume_space = False
        if request.enable_thinking and THINK_CLOSE not in prefix:
            body = prefix[len(THINK_OPEN):] if prefix.startswith(THINK_OPEN) else prefix
            position = len(body.split())
            resume_space = bool(body.strip()) and not body[-1].isspace()
            for tok in rule.think[position:]:
                if tok == THINK_CLOSE:
                    break
                think.append(tok)
            closes = True
        else:
            closes = False
        budget = request.max_tokens
        emitted = 0
        segment = Segment.ANSWER
        for segment, tokens in ((Segment.THINK, think), (Segment.ANSWER, list(rule.answer))):
            if segment is Segment.ANSWER and closes and request.stop_on_think_close:
                yield GenerationChunk("", Segment.THINK, 0, True, FinishReason.THINK_CLOSE, emitted)
                return
            for start in range(0, len(tokens), self.chunk_tokens):
                piece = tokens[start:start + self.chunk_tokens]
                lead = " " if start or (resume_space and segment is Segment.THINK) else ""
                emitted += len(piece)
                yield GenerationChunk(lead + " ".join(piece), segment, len(piece))
                if emitted >= budget:
                    yield GenerationChunk("", segment, 0, True, FinishReason.LENGTH, emitted)
                    return
        yield GenerationChunk("", segment if emitted else Segment.ANSWER, 0, True,
                              FinishReason.STOP, emitted)
