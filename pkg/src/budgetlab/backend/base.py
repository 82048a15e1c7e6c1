"""Model-invocation contract shared by the live client and the scripted mock."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Protocol

THINK_OPEN = "<think>"
THINK_CLOSE = "</think>"

Message = tuple[str, str]
SPEAKERS = ("system", "user", "assistant")


class Segment(str, Enum):
    THINK = "think"
    ANSWER = "answer"


class FinishReason(str, Enum):
    STOP = "stop"
    LENGTH = "length"
    THINK_CLOSE = "think_close"


class BackendError(Exception):
    """Base class for failures raised by a backend."""


class TransportError(BackendError):
    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempt{'s' if attempts != 1 else ''})")
        self.attempts = attempts


class ProtocolError(BackendError):
    def __init__(self, message: str, excerpt: str = ""):
        super().__init__(f"{message}: {excerpt!r}" if excerpt else message)
        self.excerpt = excerpt


class StatusError(BackendError):
    def __init__(self, status: int, body: str = ""):
        super().__init__(f"upstream returned HTTP {status}: {body[:200]}")
        self.status = status
        self.body = body


class CapabilityError(BackendError):
    """The server cannot do something the orchestrator relies on (e.g. prefix continuation)."""


@dataclass(frozen=True)
class GenerationRequest:
    messages: tuple[Message, ...]
    assistant_prefix: str = ""
    temperature: float = 0.0
    max_tokens: int = 2048
    stop_on_think_close: bool = False
    seed: int = 0
    enable_thinking: bool = True

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple((s, t) for s, t in self.messages))

    def validate(self) -> None:
        if not self.messages:
            raise ValueError("request has no messages")
        for speaker, _ in self.messages:
            if speaker not in SPEAKERS:
                raise ValueError(f"unknown speaker {speaker!r}")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature must lie in [0, 2], got {self.temperature}")
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be positive, got {self.max_tokens}")


@dataclass(frozen=True)
class GenerationChunk:
    text_delta: str
    segment: Segment
    token_count: int
    finished: bool = False
    finish_reason: FinishReason | None = None
    # Only set on the finishing chunk.
    usage_tokens: int | None = None


class Backend(Protocol):
    def generate(self, request: GenerationRequest) -> Iterator[GenerationChunk]: ...

    def injection_tokens(self, text: str) -> int:
        """Token cost of filler text the forcer splices into a think segment."""
        ...

    def probe(self) -> None:
        """Raise CapabilityError or TransportError if the backend is unusable."""
        ...


@dataclass
class StreamSummary:
    """A finished stream folded into per-segment text and token totals."""

    think_text: str = ""
    answer_text: str = ""
    think_tokens: int = 0
    answer_tokens: int = 0
    finish_reason: FinishReason | None = None
    max_chunk_tokens: int = 0
    chunks: list[GenerationChunk] = field(default_factory=list)


def collect(stream) -> StreamSummary:
    out = StreamSummary()
    think, answer = [], []
    for chunk in stream:
        out.chunks.append(chunk)
        out.max_chunk_tokens = max(out.max_chunk_tokens, chunk.token_count)
        if chunk.segment is Segment.THINK:
            think.append(chunk.text_delta)
            out.think_tokens += chunk.token_count
        else:
            answer.append(chunk.text_delta)
            out.answer_tokens += chunk.token_count
        if chunk.finished:
            out.finish_reason = chunk.finish_reason
    out.think_text = "".join(think)
    out.answer_text = "".join(answer)
    if out.finish_reason is None:
        raise ProtocolError("stream ended without a finishing chunk")
    return out
