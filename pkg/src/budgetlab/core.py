"""Domain types shared across budgetlab and the call/budget arithmetic."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

DEFAULT_SLACK = 256
DEFAULT_MAX_FORCE_ITERATIONS = 8
DEFAULT_NO_THINK_ANSWER_CAP = 4096
DEFAULT_ANSWER_CAP = 2048


class ValidationError(ValueError):
    """Raised when a value violates one of its type invariants."""


class StrategyKind(str, Enum):
    VANILLA = "vanilla"
    SELF_CONSISTENCY = "self_consistency"
    SUMMARY = "summary"
    REFLECT = "reflect"
    JUDGE = "judge"
    JUDGE_WITH_HISTORY = "judge_with_history"
    JUDGE_REFLECTION = "judge_reflection"

    @property
    def is_judge(self) -> bool:
        return self in JUDGE_KINDS

    @property
    def is_multi_trace(self) -> bool:
        return self in (StrategyKind.SELF_CONSISTENCY, StrategyKind.SUMMARY)


JUDGE_KINDS = frozenset(
    {StrategyKind.JUDGE, StrategyKind.JUDGE_WITH_HISTORY, StrategyKind.JUDGE_REFLECTION}
)

# Row order of the results table.
KIND_ORDER = (
    StrategyKind.VANILLA,
    StrategyKind.SELF_CONSISTENCY,
    StrategyKind.REFLECT,
    StrategyKind.SUMMARY,
    StrategyKind.JUDGE,
    StrategyKind.JUDGE_WITH_HISTORY,
    StrategyKind.JUDGE_REFLECTION,
)


class CallRole(str, Enum):
    TRACE = "trace"
    FEEDBACK = "feedback"
    REFINE = "refine"
    CONSOLIDATE = "consolidate"
    JUDGE = "judge"
    RETRY = "retry"


@dataclass(frozen=True)
class BudgetPolicy:
    """Thinking-token floor and cap for a single model call.

    A disabled policy has both bounds at zero; the answer is then generated
    in one call capped at ``no_think_answer_cap`` tokens.
    """

    thinking_enabled: bool
    min_think_tokens: int
    max_think_tokens: int
    max_force_iterations: int = DEFAULT_MAX_FORCE_ITERATIONS
    no_think_answer_cap: int = DEFAULT_NO_THINK_ANSWER_CAP
    answer_cap: int = DEFAULT_ANSWER_CAP

    def __post_init__(self):
        if self.min_think_tokens < 0 or self.max_think_tokens < 0:
            raise ValidationError("think token bounds must be non-negative")
        if self.min_think_tokens > self.max_think_tokens:
            raise ValidationError(
                f"min_think_tokens ({self.min_think_tokens}) exceeds "
                f"max_think_tokens ({self.max_think_tokens})"
            )
        both_zero = self.min_think_tokens == 0 and self.max_think_tokens == 0
        if self.thinking_enabled == both_zero:
            raise ValidationError(
                "thinking_enabled must be false exactly when both think bounds are zero"
            )
        if self.max_force_iterations < 1:
            raise ValidationError("max_force_iterations must be at least 1")
        if self.no_think_answer_cap < 1 or self.answer_cap < 1:
            raise ValidationError("answer caps must be positive")

    @classmethod
    def disabled(cls, no_think_answer_cap: int = DEFAULT_NO_THINK_ANSWER_CAP) -> "BudgetPolicy":
        return cls(False, 0, 0, no_think_answer_cap=no_think_answer_cap)

    @classmethod
    def from_budget(
        cls,
        per_call_budget: int,
        *,
        slack: int = DEFAULT_SLACK,
        max_force_iterations: int = DEFAULT_MAX_FORCE_ITERATIONS,
        no_think_answer_cap: int = DEFAULT_NO_THINK_ANSWER_CAP,
        answer_cap: int = DEFAULT_ANSWER_CAP,
    ) -> "BudgetPolicy":
        """Build the policy for a table budget: the budget is the floor, the cap is floor + slack."""
        if per_call_budget < 0:
            raise ValidationError(f"per_call_budget must be non-negative, got {per_call_budget}")
        if slack < 0:
            raise ValidationError(f"slack must be non-negative, got {slack}")
        if per_call_budget == 0:
            return cls.disabled(no_think_answer_cap)
        return cls(
            True,
            per_call_budget,
            per_call_budget + slack,
            max_force_iterations=max_force_iterations,
            no_think_answer_cap=no_think_answer_cap,
            answer_cap=answer_cap,
        )


@dataclass(frozen=True)
class StrategySpec:
    """One reasoning-strategy configuration.

    Temperatures left as ``None`` are filled from the kind: 1.0 for
    self-consistency and summary, 0.0 for everything else.
    """

    kind: StrategyKind
    trace_count: int = 1
    reflect_rounds: int = 0
    max_judge_retries: int = 1
    trace_temperature: float | None = None
    aggregate_temperature: float | None = None

    def __post_init__(self):
        kind = StrategyKind(self.kind)
        object.__setattr__(self, "kind", kind)
        hot = 1.0 if kind.is_multi_trace else 0.0
        if self.trace_temperature is None:
            object.__setattr__(self, "trace_temperature", hot)
        if self.aggregate_temperature is None:
            object.__setattr__(self, "aggregate_temperature", hot)
        self.validate()

    def validate(self) -> None:
        kind = self.kind
        for name in ("trace_temperature", "aggregate_temperature"):
            t = getattr(self, name)
            if not 0.0 <= t <= 2.0:
                raise ValidationError(f"{name} must lie in [0, 2], got {t}")
        if kind.is_multi_trace:
            if self.trace_count < 2:
                raise ValidationError(f"{kind.value} requires trace_count >= 2, got {self.trace_count}")
            if self.trace_temperature != 1.0:
                raise ValidationError(
                    f"{kind.value} requires trace_temperature = 1.0, got {self.trace_temperature}"
                )
        else:
            if self.trace_count != 1:
                raise ValidationError(f"{kind.value} requires trace_count = 1, got {self.trace_count}")
            if self.trace_temperature != 0.0:
                raise ValidationError(
                    f"{kind.value} requires trace_temperature = 0.0, got {self.trace_temperature}"
                )
        if kind is StrategyKind.REFLECT:
            if self.reflect_rounds < 1:
                raise ValidationError(f"reflect requires reflect_rounds >= 1, got {self.reflect_rounds}")
        elif self.reflect_rounds != 0:
            raise ValidationError(f"{kind.value} requires reflect_rounds = 0, got {self.reflect_rounds}")
        if self.max_judge_retries < 0:
            raise ValidationError("max_judge_retries must be non-negative")

    @classmethod
    def vanilla(cls) -> "StrategySpec":
        return cls(StrategyKind.VANILLA)

    @classmethod
    def self_consistency(cls, n: int) -> "StrategySpec":
        return cls(StrategyKind.SELF_CONSISTENCY, trace_count=n)

    @classmethod
    def summary(cls, n: int) -> "StrategySpec":
        return cls(StrategyKind.SUMMARY, trace_count=n)

    @classmethod
    def reflect(cls, k: int) -> "StrategySpec":
        return cls(StrategyKind.REFLECT, reflect_rounds=k)

    @classmethod
    def judge(cls, kind: StrategyKind = StrategyKind.JUDGE, retries: int = 1) -> "StrategySpec":
        if not StrategyKind(kind).is_judge:
            raise ValidationError(f"{kind} is not a judge kind")
        return cls(kind, max_judge_retries=retries)

    @property
    def label(self) -> str:
        """Configuration name as printed in results tables and legends."""
        kind = self.kind
        if kind is StrategyKind.VANILLA:
            return "Vanilla"
        if kind is StrategyKind.SELF_CONSISTENCY:
            return f"Self Consistency {self.trace_count}x"
        if kind is StrategyKind.SUMMARY:
            return f"Summary {self.trace_count}x"
        if kind is StrategyKind.REFLECT:
            return f"Reflect {self.reflect_rounds}"
        suffix = "" if self.max_judge_retries == 1 else f" r{self.max_judge_retries}"
        if kind is StrategyKind.JUDGE:
            return "Judge-LLM w/o history" + suffix
        if kind is StrategyKind.JUDGE_WITH_HISTORY:
            return "Judge-LLM with history" + suffix
        return "Judge+Reflection" + suffix

    @property
    def sort_key(self) -> tuple:
        return (KIND_ORDER.index(self.kind), self.trace_count, self.reflect_rounds, self.max_judge_retries)


@dataclass(frozen=True)
class CallRecord:
    run_id: str
    question_id: str
    trace_index: int
    call_index: int
    role: CallRole
    request_messages: tuple[tuple[str, str], ...]
    think_text: str
    answer_text: str
    think_tokens: int
    answer_tokens: int
    force_injections: int
    seed: int
    wall_time_ms: int
    temperature: float = 0.0
    closed_by: str = ""

    def __post_init__(self):
        object.__setattr__(self, "role", CallRole(self.role))
        object.__setattr__(
            self, "request_messages", tuple((s, t) for s, t in self.request_messages)
        )
        if self.role is CallRole.JUDGE and self.think_tokens != 0:
            raise ValidationError("judge calls must not think")
        if min(self.think_tokens, self.answer_tokens, self.force_injections, self.wall_time_ms) < 0:
            raise ValidationError("token counts and timings must be non-negative")


@dataclass(frozen=True)
class StrategyOutcome:
    question_id: str
    calls: tuple[CallRecord, ...]
    candidate_answers: tuple[tuple[int, str | None], ...]
    final_answer: str | None
    flags: tuple[str, ...] = ()
    error: str | None = None

    @property
    def total_calls(self) -> int:
        return len(self.calls)

    @property
    def total_think_tokens(self) -> int:
        return sum(c.think_tokens for c in self.calls)

    @property
    def roles(self) -> list[CallRole]:
        return [c.role for c in self.calls]


def expected_calls(spec: StrategySpec) -> int:
    """Calls made by ``spec``; for judge kinds the worst case where every verdict rejects."""
    spec.validate()
    kind = spec.kind
    if kind is StrategyKind.VANILLA:
        return 1
    if kind is StrategyKind.SELF_CONSISTENCY:
        return spec.trace_count
    if kind is StrategyKind.SUMMARY:
        return spec.trace_count + 1
    if kind is StrategyKind.REFLECT:
        return 2 * spec.reflect_rounds + 1
    r = spec.max_judge_retries
    if kind is StrategyKind.JUDGE_REFLECTION:
        # trace, judge, then (feedback, refine, judge) per retry
        return 2 + 3 * r
    # trace, judge, then (trace or retry, judge) per retry
    return 2 + 2 * r


def thinking_calls(spec: StrategySpec) -> int:
    """Calls that are budget-forced; judge verdict calls never think."""
    kind = spec.kind
    if not kind.is_judge:
        return expected_calls(spec)
    r = spec.max_judge_retries
    if kind is StrategyKind.JUDGE_REFLECTION:
        return 1 + 2 * r
    return 1 + r


def budget_plan(spec: StrategySpec, per_call_budget: int) -> tuple[int, int]:
    """Return ``(calls, total_budget)`` for a per-call thinking budget."""
    if per_call_budget < 0:
        raise ValidationError(f"per_call_budget must be non-negative, got {per_call_budget}")
    return expected_calls(spec), per_call_budget * thinking_calls(spec)
