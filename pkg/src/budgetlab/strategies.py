"""The seven reasoning-strategy configurations as sequences of forced calls."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .backend.base import Backend, BackendError, GenerationRequest
from .core import (
    BudgetPolicy,
    CallRecord,
    CallRole,
    StrategyKind,
    StrategyOutcome,
    StrategySpec,
)
from .forcing import FILLER, force_thinking
from .prompts import PromptSet
from .scoring import extract_answer, majority_vote

log = logging.getLogger(__name__)

JUDGE_USER = "Question:\n{q}\n\nProposed answer:\n{a}"
FEEDBACK_USER = "Question:\n{q}\n\nAnswer:\n{a}"
REJECTION = "Your previous answer was judged incorrect. Answer the question again."

ANSWER_ROLES = (CallRole.TRACE, CallRole.REFINE, CallRole.RETRY)


def _fill(template: str, question: str, answer: str) -> str:
    return template.replace("{q}", question).replace("{a}", answer)


def parse_verdict(reply: str) -> tuple[bool, bool]:
    """Return ``(accepted, parsed)`` from the first line of a judge reply.

    Unparseable replies are accepted (fail-open).
    """
    lines = reply.strip().splitlines()
    first = lines[0].upper() if lines else ""
    if "INCORRECT" in first:
        return False, True
    if "CORRECT" in first:
        return True, True
    return True, False


@dataclass
class _Session:
    backend: Backend
    policy: BudgetPolicy
    run_id: str
    question_id: str
    base_seed: int
    filler: str
    calls: list[CallRecord] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def call(self, role: CallRole, messages, *, trace_index: int, temperature: float,
             thinking: bool = True) -> CallRecord:
        seed = self.base_seed + trace_index
        policy = self.policy if thinking else BudgetPolicy.disabled(self.policy.no_think_answer_cap)
        request = GenerationRequest(tuple(messages), temperature=temperature, seed=seed)
        trace = force_thinking(self.backend, request, policy, filler=self.filler)
        if trace.under_budget and "under_budget" not in self.flags:
            self.flags.append("under_budget")
        record = CallRecord(
            run_id=self.run_id,
            question_id=self.question_id,
            trace_index=trace_index,
            call_index=len(self.calls),
            role=role,
            request_messages=tuple(messages),
            think_text=trace.think_text,
            answer_text=trace.answer_text,
            think_tokens=trace.think_tokens,
            answer_tokens=trace.answer_tokens,
            force_injections=trace.force_injections,
            seed=seed,
            wall_time_ms=trace.wall_time_ms,
            temperature=temperature,
            closed_by=trace.closed_by.value,
        )
        self.calls.append(record)
        return record

    def outcome(self, kind: StrategyKind, error: str | None = None) -> StrategyOutcome:
        calls = tuple(sorted(self.calls, key=lambda c: (c.trace_index, c.call_index)))
        flags = list(self.flags)
        if error is not None:
            flags.append("error")
        final, fallback = resolve_final(kind, calls)
        if fallback:
            flags.append("consolidation_fallback")
        return StrategyOutcome(
            question_id=self.question_id,
            calls=calls,
            candidate_answers=candidates(kind, calls),
            final_answer=final,
            flags=tuple(flags),
            error=error,
        )


def candidates(kind: StrategyKind, calls) -> tuple[tuple[int, str | None], ...]:
    if kind.is_multi_trace:
        return tuple((c.trace_index, extract_answer(c.answer_text))
                     for c in calls if c.role is CallRole.TRACE)
    return tuple((c.trace_index, extract_answer(c.answer_text))
                 for c in calls if c.role in ANSWER_ROLES)


def resolve_final(kind: StrategyKind, calls) -> tuple[str | None, bool]:
    """Final answer from recorded calls alone; second item flags a summary fallback.

    Shared by live runs and log replay so both grade identically.
    """
    kind = StrategyKind(kind)
    if kind is StrategyKind.SELF_CONSISTENCY:
        return majority_vote(candidates(kind, calls)), False
    if kind is StrategyKind.SUMMARY:
        for c in calls:
            if c.role is CallRole.CONSOLIDATE:
                return extract_answer(c.answer_text), False
        if not calls:
            return None, False
        return majority_vote(candidates(kind, calls)), True
    answers = [c for c in calls if c.role in ANSWER_ROLES]
    return (extract_answer(answers[-1].answer_text) if answers else None), False


def _base(question: str, system: str):
    return [("system", system), ("user", question)]


def run_vanilla(question, policy, prompts, backend, **ctx) -> StrategyOutcome:
    s = _session(backend, policy, ctx)
    try:
        s.call(CallRole.TRACE, _base(question, prompts.assistant_system), trace_index=0,
               temperature=0.0)
    except BackendError as exc:
        return s.outcome(StrategyKind.VANILLA, str(exc))
    return s.outcome(StrategyKind.VANILLA)


def _traces(s: _Session, question: str, n: int, prompts: PromptSet, temperature: float):
    messages = _base(question, prompts.assistant_system)
    return [s.call(CallRole.TRACE, messages, trace_index=i, temperature=temperature)
            for i in range(n)]


def run_self_consistency(question, n, policy, prompts, backend, *, temperature=1.0,
                         **ctx) -> StrategyOutcome:
    if n < 2:
        raise ValueError("self-consistency needs at least two traces")
    s = _session(backend, policy, ctx)
    try:
        _traces(s, question, n, prompts, temperature)
    except BackendError as exc:
        return s.outcome(StrategyKind.SELF_CONSISTENCY, str(exc))
    return s.outcome(StrategyKind.SELF_CONSISTENCY)


def run_summary(question, n, policy, prompts, backend, *, temperature=1.0,
                aggregate_temperature=1.0, **ctx) -> StrategyOutcome:
    if n < 2:
        raise ValueError("summary needs at least two traces")
    s = _session(backend, policy, ctx)
    try:
        traces = _traces(s, question, n, prompts, temperature)
    except BackendError as exc:
        return s.outcome(StrategyKind.SUMMARY, str(exc))
    user = prompts.render_summary(question, [t.answer_text for t in traces])
    try:
        s.call(CallRole.CONSOLIDATE, [("system", prompts.assistant_system), ("user", user)],
               trace_index=n, temperature=aggregate_temperature)
    except BackendError as exc:
        log.warning("consolidation failed for %s: %s", s.question_id, exc)
        return s.outcome(StrategyKind.SUMMARY, str(exc))
    return s.outcome(StrategyKind.SUMMARY)


def _feedback_refine(s: _Session, question: str, history: list, answer: str,
                     prompts: PromptSet, trace_index: int):
    fb = s.call(CallRole.FEEDBACK,
                [("system", prompts.reflection_grader_system),
                 ("user", _fill(FEEDBACK_USER, question, answer))],
                trace_index=trace_index, temperature=0.0)
    history += [("assistant", answer), ("user", fb.answer_text)]
    return s.call(CallRole.REFINE, [("system", prompts.reflection_system)] + history,
                  trace_index=trace_index, temperature=0.0)


def run_reflect(question, k, policy, prompts, backend, **ctx) -> StrategyOutcome:
    if k < 1:
        raise ValueError("reflection needs at least one round")
    s = _session(backend, policy, ctx)
    history = [("user", question)]
    try:
        current = s.call(CallRole.TRACE, [("system", prompts.reflection_system)] + history,
                         trace_index=0, temperature=0.0)
        for _ in range(k):
            current = _feedback_refine(s, question, history, current.answer_text, prompts, 0)
    except BackendError as exc:
        s.flags.append("partial")
        return s.outcome(StrategyKind.REFLECT, str(exc))
    return s.outcome(StrategyKind.REFLECT)


JUDGE_VARIANTS = {
    "plain": StrategyKind.JUDGE,
    "with_history": StrategyKind.JUDGE_WITH_HISTORY,
    "with_reflection": StrategyKind.JUDGE_REFLECTION,
}


def run_judge(question, variant, max_retries, policy, prompts, backend, **ctx) -> StrategyOutcome:
    """Answer, then let a zero-think judge call decide whether to try again."""
    kind = JUDGE_VARIANTS.get(variant, variant)
    kind = StrategyKind(kind)
    if not kind.is_judge:
        raise ValueError(f"{variant!r} is not a judge variant")
    if max_retries < 0:
        raise ValueError("max_retries must be non-negative")
    s = _session(backend, policy, ctx)
    base = _base(question, prompts.assistant_system)
    try:
        answer = s.call(CallRole.TRACE, base, trace_index=0, temperature=0.0)
        attempt = 0
        while True:
            verdict = s.call(CallRole.JUDGE,
                             [("system", prompts.judge_system),
                              ("user", _fill(JUDGE_USER, question, answer.answer_text))],
                             trace_index=attempt, temperature=0.0, thinking=False)
            accepted, parsed = parse_verdict(verdict.answer_text)
            if not parsed and "verdict_unparsed" not in s.flags:
                s.flags.append("verdict_unparsed")
            if accepted or attempt >= max_retries:
                break
            attempt += 1
            if kind is StrategyKind.JUDGE:
                answer = s.call(CallRole.TRACE, base, trace_index=attempt, temperature=0.0)
            elif kind is StrategyKind.JUDGE_WITH_HISTORY:
                retry = base + [("assistant", answer.answer_text), ("user", REJECTION)]
                answer = s.call(CallRole.RETRY, retry, trace_index=attempt, temperature=0.0)
            else:
                history = [("user", question)]
                answer = _feedback_refine(s, question, history, answer.answer_text, prompts,
                                          attempt)
    except BackendError as exc:
        s.flags.append("partial")
        return s.outcome(kind, str(exc))
    return s.outcome(kind)


def _session(backend, policy, ctx) -> _Session:
    return _Session(
        backend=backend,
        policy=policy,
        run_id=ctx.get("run_id", ""),
        question_id=ctx.get("question_id", "q"),
        base_seed=ctx.get("base_seed", 0),
        filler=ctx.get("filler", FILLER),
    )


def run_strategy(spec: StrategySpec, question: str, policy: BudgetPolicy, prompts: PromptSet,
                 backend: Backend, **ctx) -> StrategyOutcome:
    kind = spec.kind
    if kind is StrategyKind.VANILLA:
        return run_vanilla(question, policy, prompts, backend, **ctx)
    if kind is StrategyKind.SELF_CONSISTENCY:
        return run_self_consistency(question, spec.trace_count, policy, prompts, backend,
                                    temperature=spec.trace_temperature, **ctx)
    if kind is StrategyKind.SUMMARY:
        return run_summary(question, spec.trace_count, policy, prompts, backend,
                           temperature=spec.trace_temperature,
                           aggregate_temperature=spec.aggregate_temperature, **ctx)
    if kind is StrategyKind.REFLECT:
        return run_reflect(question, spec.reflect_rounds, policy, prompts, backend, **ctx)
    return run_judge(question, kind, spec.max_judge_retries, policy, prompts, backend, **ctx)
