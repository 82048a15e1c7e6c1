"""Split raw completion deltas into think and answer chunks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .base import (
    THINK_CLOSE,
    THINK_OPEN,
    FinishReason,
    GenerationChunk,
    ProtocolError,
    Segment,
)


@dataclass(frozen=True)
class RawDelta:
    """One decoded upstream event. Plain strings passed to the classifier mean ``content``."""

    content: str = ""
    reasoning: str = ""
    finish_reason: str | None = None
    usage_tokens: int | None = None


def _held_tail(text: str) -> int:
    """Length of the longest suffix of ``text`` that could start a marker."""
    best = 0
    for marker in (THINK_OPEN, THINK_CLOSE):
        for n in range(min(len(marker) - 1, len(text)), 0, -1):
            if marker.startswith(text[-n:]):
                best = max(best, n)
                break
    return best


class _Classifier:
    def __init__(self, start_in_think: bool, halt_on_close: bool):
        self.mode = "think" if start_in_think else "pre"
        self.halt_on_close = halt_on_close
        self.from_reasoning = False
        self.buf = ""
        self.closed = False

    def _chunk(self, text: str, segment: Segment) -> list[GenerationChunk]:
        return [GenerationChunk(text, segment, 1)] if text else []

    def feed_reasoning(self, text: str) -> list[GenerationChunk]:
        if not text:
            return []
        if self.mode == "answer":
            raise ProtocolError("reasoning delta after answer content", text[:80])
        out = []
        if self.mode == "pre":
            # leading whitespace before reasoning belongs to nothing
            self.buf = ""
        elif self.buf:
            out += self._drain_think_buffer(final=True)
        self.mode = "think"
        self.from_reasoning = True
        out += self._chunk(text, Segment.THINK)
        return out

    def feed_content(self, text: str) -> list[GenerationChunk]:
        if not text:
            return []
        if self.mode == "think" and self.from_reasoning and not self.buf:
            # reasoning field ended: the first content delta closes the think segment
            self.closed = True
            self.mode = "answer"
            self.from_reasoning = False
            stripped = text.lstrip()
            if stripped.startswith(THINK_CLOSE):
                text = stripped[len(THINK_CLOSE):]
            self.buf = text
            if self.halt_on_close:
                return []
            return self._process_answer(final=False)
        self.buf += text
        return self._process(final=False)

    def finish(self) -> list[GenerationChunk]:
        return self._process(final=True)

    def _process(self, final: bool) -> list[GenerationChunk]:
        out: list[GenerationChunk] = []
        if self.mode == "pre":
            stripped = self.buf.lstrip()
            if stripped.startswith(THINK_OPEN):
                self.buf = stripped[len(THINK_OPEN):]
                self.mode = "think"
            elif stripped.startswith(THINK_CLOSE):
                raise ProtocolError(f"{THINK_CLOSE} before {THINK_OPEN}", self.buf[:80])
            elif not final and (not stripped or THINK_OPEN.startswith(stripped)
                                or THINK_CLOSE.startswith(stripped)):
                return out
            else:
                self.mode = "answer"
        if self.mode == "think":
            out += self._drain_think_buffer(final)
            if self.closed and self.mode == "answer" and not self.halt_on_close:
                out += self._process_answer(final)
            return out
        out += self._process_answer(final)
        return out

    def _drain_think_buffer(self, final: bool) -> list[GenerationChunk]:
        buf = self.buf
        close = buf.find(THINK_CLOSE)
        nested = buf.find(THINK_OPEN)
        if nested != -1 and (close == -1 or nested < close):
            raise ProtocolError(f"nested {THINK_OPEN}", buf[max(0, nested - 20):nested + 20])
        if close != -1:
            self.buf = buf[close + len(THINK_CLOSE):]
            self.mode = "answer"
            self.closed = True
            return self._chunk(buf[:close], Segment.THINK)
        hold = 0 if final else _held_tail(buf)
        self.buf = buf[len(buf) - hold:]
        return self._chunk(buf[: len(buf) - hold], Segment.THINK)

    def _process_answer(self, final: bool) -> list[GenerationChunk]:
        buf = self.buf
        for marker in (THINK_OPEN, THINK_CLOSE):
            at = buf.find(marker)
            if at != -1:
                raise ProtocolError(f"{marker} inside the answer segment", buf[max(0, at - 20):at + 20])
        hold = 0 if final else _held_tail(buf)
        self.buf = buf[len(buf) - hold:]
        return self._chunk(buf[: len(buf) - hold], Segment.ANSWER)


def classify_stream(
    raw_deltas: Iterable[str | RawDelta],
    *,
    start_in_think: bool = False,
    stop_on_think_close: bool = False,
) -> Iterator[GenerationChunk]:
    """Label raw deltas as Think or Answer and finish with one sentinel chunk.

    Think text is whatever lies between the literal markers (or arrives in a
    reasoning field); the markers themselves are dropped. Each emitted piece
    counts one token; the sentinel absorbs any surplus the upstream usage
    reports so that chunk counts always sum to the stream total.
    """
    state = _Classifier(start_in_think, stop_on_think_close)
    counted = 0
    usage: int | None = None
    upstream_finish: str | None = None
    last_segment = Segment.THINK if start_in_think else Segment.ANSWER

    def sentinel(reason: FinishReason) -> GenerationChunk:
        total = counted if usage is None else max(usage, counted)
        return GenerationChunk("", last_segment, total - counted, True, reason, total)

    for raw in raw_deltas:
        if isinstance(raw, str):
            raw = RawDelta(content=raw)
        chunks = state.feed_reasoning(raw.reasoning) + state.feed_content(raw.content)
        for chunk in chunks:
            counted += chunk.token_count
            last_segment = chunk.segment
            yield chunk
        if state.closed and stop_on_think_close:
            last_segment = Segment.THINK
            yield sentinel(FinishReason.THINK_CLOSE)
            return
        if raw.finish_reason is not None:
            upstream_finish = raw.finish_reason
        if raw.usage_tokens is not None:
            usage = raw.usage_tokens
    for chunk in state.finish():
        counted += chunk.token_count
        last_segment = chunk.segment
        yield chunk
    if state.mode == "think":
        last_segment = Segment.THINK
    reason = FinishReason.LENGTH if upstream_finish == "length" else FinishReason.STOP
    yield sentinel(reason)
