"""Configuration x budget run matrix, ledger and log replay."""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..backend.base import Backend
from ..core import BudgetPolicy, StrategyKind, StrategyOutcome, StrategySpec, budget_plan
from ..forcing import FILLER
from ..prompts import PromptSet
from ..scoring import accuracy, score
from ..strategies import resolve_final, run_strategy
from .dataset import Dataset, Item
from .eventlog import SCHEMA_VERSION, EventLog, LogError, _now, call_to_record, read_log, \
    record_to_call, recover

log = logging.getLogger(__name__)

REPEAT_SEED_STRIDE = 1000


@dataclass(frozen=True)
class Cell:
    spec: StrategySpec
    budget: int

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError(f"budget must be non-negative, got {self.budget}")

    @property
    def key(self) -> str:
        s = self.spec
        return (f"{s.kind.value}/n{s.trace_count}/k{s.reflect_rounds}/r{s.max_judge_retries}"
                f"/t{s.trace_temperature:g}/a{s.aggregate_temperature:g}/b{self.budget}")


@dataclass(frozen=True)
class RunMatrix:
    model_tag: str
    dataset: Dataset
    cells: tuple[Cell, ...]
    base_seed: int = 0
    parallelism: int = 1
    repeats: int = 1
    slack: int = 256
    max_force_iterations: int = 8
    no_think_answer_cap: int = 4096
    answer_cap: int = 2048
    filler: str = FILLER

    def __post_init__(self):
        if not self.cells:
            raise ValueError("run matrix has no cells")
        if self.parallelism < 1 or self.repeats < 1:
            raise ValueError("parallelism and repeats must be positive")

    def policy(self, cell: Cell) -> BudgetPolicy:
        return BudgetPolicy.from_budget(
            cell.budget,
            slack=self.slack,
            max_force_iterations=self.max_force_iterations,
            no_think_answer_cap=self.no_think_answer_cap,
            answer_cap=self.answer_cap,
        )

    @property
    def run_id(self) -> str:
        text = f"{self.model_tag}|{self.dataset.name}|{self.base_seed}"
        return hashlib.sha256(text.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class QuestionResult:
    question_id: str
    repeat: int
    final_answer: str | None
    correct: bool
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class RunResult:
    model_tag: str
    dataset: str
    spec: StrategySpec
    budget: int
    accuracy: float
    realized_calls_total: int
    realized_think_tokens_total: int
    n_failed: int
    per_question: tuple[QuestionResult, ...] = field(default=(), compare=True)

    @property
    def thinking(self) -> bool:
        return self.budget > 0

    @property
    def planned(self) -> tuple[int, int]:
        return budget_plan(self.spec, self.budget)


def _spec_record(spec: StrategySpec) -> dict:
    d = asdict(spec)
    d["kind"] = spec.kind.value
    return d


def _cell_header(matrix: RunMatrix, cell: Cell) -> dict:
    policy = matrix.policy(cell)
    return {
        "schema_version": SCHEMA_VERSION,
        "type": "cell",
        "cell": cell.key,
        "model_tag": matrix.model_tag,
        "dataset": matrix.dataset.name,
        "spec": _spec_record(cell.spec),
        "budget": cell.budget,
        "policy": asdict(policy),
        "n_questions": len(matrix.dataset),
        "repeats": matrix.repeats,
        "ts": _now(),
    }


def _outcome_record(cell: Cell, repeat: int, item: Item, outcome: StrategyOutcome) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "type": "outcome",
        "cell": cell.key,
        "repeat": repeat,
        "question_id": item.question_id,
        "gold": item.gold_answer,
        "final_answer": outcome.final_answer,
        "correct": score(outcome.final_answer, item.gold_answer),
        "n_calls": outcome.total_calls,
        "flags": list(outcome.flags),
        "error": outcome.error,
        "ts": _now(),
    }


def _run_one(matrix: RunMatrix, cell: Cell, repeat: int, item: Item, backend: Backend,
             prompts: PromptSet) -> StrategyOutcome:
    try:
        return run_strategy(
            cell.spec, item.question, matrix.policy(cell), prompts, backend,
            run_id=matrix.run_id, question_id=item.question_id,
            base_seed=matrix.base_seed + REPEAT_SEED_STRIDE * repeat, filler=matrix.filler,
        )
    except Exception as exc:  # a broken question must never abort the matrix
        log.exception("question %s failed in cell %s", item.question_id, cell.key)
        return StrategyOutcome(item.question_id, (), (), None, ("error",), repr(exc))


def run_matrix(matrix: RunMatrix, backend: Backend, prompts: PromptSet, log_path: str | Path,
               *, resume: bool = True) -> list[RunResult]:
    """Run every (cell, repeat, question), appending to ``log_path``; return per-cell results.

    With ``resume`` the existing log is trimmed to its last complete group and
    already finished questions are skipped. Results are computed from the log
    so the ledger always agrees with it.
    """
    backend.probe()
    log_path = Path(log_path)
    if resume:
        existing = recover(log_path)
    else:
        existing = []
        if log_path.exists():
            log_path.unlink()
    headers = {r["cell"] for r in existing if r["type"] == "cell"}
    done = {(r["cell"], r["repeat"], r["question_id"]) for r in existing if r["type"] == "outcome"}

    with EventLog(log_path) as events, ThreadPoolExecutor(matrix.parallelism) as pool:
        for cell in matrix.cells:
            if cell.key not in headers:
                events.append([_cell_header(matrix, cell)])
                headers.add(cell.key)
            pending = [(r, item) for r in range(matrix.repeats) for item in matrix.dataset.items
                       if (cell.key, r, item.question_id) not in done]
            if not pending:
                continue
            log.info("cell %s: %d question(s) to run", cell.key, len(pending))
            outcomes = pool.map(
                lambda job: _run_one(matrix, cell, job[0], job[1], backend, prompts), pending
            )
            # map yields in submission order, so the log order is independent of timing
            for (repeat, item), outcome in zip(pending, outcomes):
                group = [call_to_record(cell.key, repeat, c) for c in outcome.calls]
                group.append(_outcome_record(cell, repeat, item, outcome))
                events.append(group)

    results, _ = replay_records(read_log(log_path))
    wanted = [c.key for c in matrix.cells]
    by_key = {_result_key(r): r for r in results}
    return [by_key[(matrix.model_tag, matrix.dataset.name, k)] for k in wanted]


def _result_key(result: RunResult) -> tuple[str, str, str]:
    return result.model_tag, result.dataset, Cell(result.spec, result.budget).key


def replay_records(records: list[dict]) -> tuple[list[RunResult], list[str]]:
    """Recompute results from log records alone; returns (results, incomplete cell keys)."""
    headers: dict[tuple, dict] = {}
    calls: dict[tuple, dict] = {}
    outcomes: dict[tuple, list] = {}
    # call/outcome records name only the cell; bind them to the latest header with that key
    scope_of: dict[str, tuple] = {}
    for rec in records:
        if rec["type"] == "cell":
            scope = (rec["model_tag"], rec["dataset"], rec["cell"])
            headers.setdefault(scope, rec)
            scope_of[rec["cell"]] = scope
            continue
        scope = scope_of.get(rec["cell"])
        if scope is None:
            raise LogError(f"record for cell {rec['cell']!r} precedes its header")
        group_key = (rec["repeat"], rec["question_id"])
        if rec["type"] == "call":
            calls.setdefault(scope, {}).setdefault(group_key, []).append(record_to_call(rec))
        else:
            outcomes.setdefault(scope, []).append(rec)

    results, incomplete = [], []
    for scope, header in headers.items():
        expected = header["n_questions"] * header.get("repeats", 1)
        got = outcomes.get(scope, [])
        if len(got) < expected:
            incomplete.append(f"{scope[0]}/{scope[1]}/{scope[2]} ({len(got)}/{expected})")
            continue
        spec_fields = dict(header["spec"])
        spec = StrategySpec(kind=StrategyKind(spec_fields.pop("kind")), **spec_fields)
        cell_calls = calls.get(scope, {})
        per_q, n_calls, n_think, n_failed = [], 0, 0, 0
        for out in got:
            qcalls = cell_calls.get((out["repeat"], out["question_id"]), [])
            final, _ = resolve_final(spec.kind, qcalls)
            n_calls += len(qcalls)
            n_think += sum(c.think_tokens for c in qcalls)
            n_failed += out.get("error") is not None
            per_q.append(QuestionResult(out["question_id"], out["repeat"], final,
                                        score(final, out["gold"]), tuple(out.get("flags", ()))))
        results.append(RunResult(
            model_tag=scope[0],
            dataset=scope[1],
            spec=spec,
            budget=header["budget"],
            accuracy=accuracy([q.correct for q in per_q]),
            realized_calls_total=n_calls,
            realized_think_tokens_total=n_think,
            n_failed=n_failed,
            per_question=tuple(per_q),
        ))
    return results, incomplete


def replay(log_path: str | Path) -> tuple[list[RunResult], list[str]]:
    return replay_records(read_log(log_path))
