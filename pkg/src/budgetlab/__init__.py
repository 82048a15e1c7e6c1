"""Thinking-budget orchestration and evaluation for reasoning language models."""

from .core import (
    BudgetPolicy,
    CallRecord,
    CallRole,
    StrategyKind,
    StrategyOutcome,
    StrategySpec,
    ValidationError,
    budget_plan,
    expected_calls,
)
from .forcing import ClosedBy, ForcedTrace, force_thinking
from .prompts import PromptSet
from .scoring import accuracy, extract_answer, majority_vote, normalize, score

__version__ = "0.1.0"

__all__ = [
    "BudgetPolicy",
    "CallRecord",
    "CallRole",
    "ClosedBy",
    "ForcedTrace",
    "PromptSet",
    "StrategyKind",
    "StrategyOutcome",
    "StrategySpec",
    "ValidationError",
    "accuracy",
    "budget_plan",
    "expected_calls",
    "extract_answer",
    "force_thinking",
    "majority_vote",
    "normalize",
    "score",
]
