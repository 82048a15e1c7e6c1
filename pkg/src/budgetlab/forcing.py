"""Budget forcing: keep a model thinking until its floor is met, close it at the cap.

Premature closures are stripped and replaced by a filler word ("Wait"), after
which the open think segment is sent back as an assistant prefix for the model
to continue. When the cap is reached first the engine writes the closing
marker itself and asks for the answer by continuation.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, replace
from enum import Enum

from .backend.base import (
    THINK_CLOSE,
    THINK_OPEN,
    Backend,
    FinishReason,
    GenerationRequest,
    collect,
)
from .core import BudgetPolicy

log = logging.getLogger(__name__)

FILLER = "Wait"


class ClosedBy(str, Enum):
    MODEL_CHOICE = "model_choice"
    FORCED_CLOSE = "forced_close"
    DISABLED = "disabled"
    # model closed below the floor after every allowed injection was spent
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class ForcedTrace:
    think_text: str
    answer_text: str
    think_tokens: int
    answer_tokens: int
    force_injections: int
    closed_by: ClosedBy
    requests: int = 1
    max_chunk_tokens: int = 0
    wall_time_ms: int = 0

    @property
    def under_budget(self) -> bool:
        return self.closed_by is ClosedBy.EXHAUSTED


def _sep(text: str) -> str:
    return "" if not text or text[-1].isspace() else " "


def force_thinking(
    backend: Backend,
    request: GenerationRequest,
    policy: BudgetPolicy,
    *,
    filler: str = FILLER,
) -> ForcedTrace:
    if request.assistant_prefix:
        raise ValueError("force_thinking expects a request without an assistant prefix")
    started = time.monotonic()

    def elapsed() -> int:
        return int((time.monotonic() - started) * 1000)

    if not policy.thinking_enabled:
        req = replace(request, enable_thinking=False, stop_on_think_close=False,
                      max_tokens=policy.no_think_answer_cap)
        got = collect(backend.generate(req))
        if got.think_tokens:
            log.warning("backend produced %d think tokens with thinking disabled; dropped",
                        got.think_tokens)
        return ForcedTrace("", got.answer_text, 0, got.answer_tokens, 0, ClosedBy.DISABLED,
                           1, got.max_chunk_tokens, elapsed())

    think = ""
    think_tokens = 0
    injections = 0
    requests = 0
    max_chunk = 0
    pending_answer: tuple[str, int] | None = None
    prefix = ""
    while True:
        remaining = policy.max_think_tokens - think_tokens
        if remaining <= 0:
            closed_by = ClosedBy.FORCED_CLOSE
            break
        req = replace(request, assistant_prefix=prefix, stop_on_think_close=True,
                      max_tokens=remaining, enable_thinking=True)
        got = collect(backend.generate(req))
        requests += 1
        max_chunk = max(max_chunk, got.max_chunk_tokens)
        think += got.think_text
        think_tokens += got.think_tokens
        if got.finish_reason is FinishReason.LENGTH:
            closed_by = ClosedBy.FORCED_CLOSE
            break
        # ThinkClose, or Stop from a model that ended (or never opened) its reasoning
        if think_tokens >= policy.min_think_tokens:
            closed_by = ClosedBy.MODEL_CHOICE
            if got.answer_tokens and got.finish_reason is FinishReason.STOP:
                pending_answer = (got.answer_text, got.answer_tokens)
            break
        if injections >= policy.max_force_iterations:
            closed_by = ClosedBy.EXHAUSTED
            log.info("think floor %d not met after %d injections (%d tokens)",
                     policy.min_think_tokens, injections, think_tokens)
            break
        think += _sep(think) + filler
        think_tokens += backend.injection_tokens(filler)
        injections += 1
        prefix = THINK_OPEN + think

    if pending_answer is not None:
        answer_text, answer_tokens = pending_answer
    else:
        req = replace(request, assistant_prefix=THINK_OPEN + think + _sep(think) + THINK_CLOSE,
                      stop_on_think_close=False, max_tokens=policy.answer_cap, enable_thinking=True)
        got = collect(backend.generate(req))
        requests += 1
        max_chunk = max(max_chunk, got.max_chunk_tokens)
        if got.think_tokens:
            log.warning("backend reopened thinking after closure; %d tokens dropped", got.think_tokens)
        answer_text, answer_tokens = got.answer_text, got.answer_tokens
    return ForcedTrace(think, answer_text, think_tokens, answer_tokens, injections, closed_by,
                       requests, max_chunk, elapsed())
