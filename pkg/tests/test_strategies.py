import pytest

from budgetlab.backend import MockBackend, MockScript, StatusError
from budgetlab.core import BudgetPolicy, CallRole, StrategyKind, StrategySpec, expected_calls
from budgetlab.prompts import PromptSet
from budgetlab.strategies import parse_verdict, run_judge, run_strategy
from oracles import expected_roles

PROMPTS = PromptSet()
THINK = BudgetPolicy.from_budget(20, slack=8)
JUDGE_KINDS = [StrategyKind.JUDGE, StrategyKind.JUDGE_WITH_HISTORY, StrategyKind.JUDGE_REFLECTION]


def judge_script(rejections: int, think: int = 40) -> MockScript:
    """Judge says INCORRECT for seeds below ``rejections`` and CORRECT afterwards."""
    lines = [f'RULE "strict grader" SEED {s} THINK ANSWER INCORRECT' for s in range(rejections)]
    lines.append('RULE "strict grader" THINK ANSWER CORRECT')
    lines.append(f"DEFAULT THINK t*{think} ANSWER \\boxed{{7}}")
    return MockScript.parse("\n".join(lines) + "\n")


def roles(outcome):
    return [c.role.value for c in outcome.calls]


def run(spec, script, policy=THINK, **ctx):
    backend = MockBackend(script)
    return run_strategy(spec, "What is 3+4?", policy, PROMPTS, backend, **ctx), backend


@pytest.mark.parametrize("spec, k_args", [
    (StrategySpec.vanilla(), {}),
    *[(StrategySpec.self_consistency(n), {"n": n}) for n in range(2, 6)],
    *[(StrategySpec.summary(n), {"n": n}) for n in range(2, 6)],
    *[(StrategySpec.reflect(k), {"k": k}) for k in (1, 2)],
])
@pytest.mark.parametrize("budget", [0, 20])
def test_non_judge_role_shapes(spec, k_args, budget):
    out, backend = run(spec, judge_script(0), BudgetPolicy.from_budget(budget, slack=8))
    assert roles(out) == expected_roles(spec.kind, **k_args)
    assert out.total_calls == expected_calls(spec)
    if budget == 0:
        assert out.total_think_tokens == 0
    else:
        assert all(c.think_tokens >= 20 for c in out.calls)


@pytest.mark.parametrize("kind", JUDGE_KINDS)
@pytest.mark.parametrize("retries", [0, 1, 2])
@pytest.mark.parametrize("rejections", [0, 1, 2, 3])
def test_judge_role_shapes(kind, retries, rejections):
    out, _ = run(StrategySpec.judge(kind, retries), judge_script(rejections))
    assert roles(out) == expected_roles(kind, retries=retries, rejections=rejections)
    assert out.total_calls <= expected_calls(StrategySpec.judge(kind, retries))
    assert all(c.think_tokens == 0 for c in out.calls if c.role is CallRole.JUDGE)
    assert out.final_answer == "7"


def test_judge_variant_aliases():
    a = run_judge("q", "with_history", 1, THINK, PROMPTS, MockBackend(judge_script(1)))
    assert roles(a) == ["trace", "judge", "retry", "judge"]
    with pytest.raises(ValueError):
        run_judge("q", StrategyKind.SUMMARY, 1, THINK, PROMPTS, MockBackend(judge_script(0)))


def test_with_history_retry_sees_rejection():
    out, _ = run(StrategySpec.judge(StrategyKind.JUDGE_WITH_HISTORY, 1), judge_script(1))
    retry = out.calls[2]
    assert retry.request_messages[-2][0] == "assistant"
    assert "incorrect" in retry.request_messages[-1][1]


def test_verdict_parsing():
    assert parse_verdict("INCORRECT\nbecause") == (False, True)
    assert parse_verdict("correct") == (True, True)
    assert parse_verdict("maybe?") == (True, False)
    assert parse_verdict("") == (True, False)


def test_unparsed_verdict_fails_open_and_flags():
    script = MockScript.parse('RULE "strict grader" THINK ANSWER dunno\nDEFAULT THINK t ANSWER \\boxed{1}\n')
    out, _ = run(StrategySpec.judge(StrategyKind.JUDGE, 2), script)
    assert roles(out) == ["trace", "judge"]
    assert "verdict_unparsed" in out.flags


@pytest.mark.parametrize("spec", [
    StrategySpec.vanilla(), StrategySpec.self_consistency(3), StrategySpec.summary(3),
    StrategySpec.reflect(1), *[StrategySpec.judge(k, 1) for k in JUDGE_KINDS],
])
def test_temperature_policy(spec):
    out, backend = run(spec, judge_script(1))
    hot = spec.kind in (StrategyKind.SELF_CONSISTENCY, StrategyKind.SUMMARY)
    assert {r.temperature for r in backend.requests} == {1.0 if hot else 0.0}
    assert {c.temperature for c in out.calls} == {1.0 if hot else 0.0}


def test_trace_seeds_are_distinct_and_offset():
    out, _ = run(StrategySpec.self_consistency(4), judge_script(0), base_seed=100)
    assert [c.seed for c in out.calls] == [100, 101, 102, 103]
    assert [c.trace_index for c in out.calls] == [0, 1, 2, 3]


def test_self_consistency_votes():
    script = MockScript.parse("RULE x SEED 1 THINK ANSWER \\boxed{9}\n"
                              "RULE x SEED 2 THINK ANSWER \\boxed{9}\n"
                              "DEFAULT THINK ANSWER \\boxed{4}\n")
    out = run_strategy(StrategySpec.self_consistency(3), "x", BudgetPolicy.disabled(), PROMPTS,
                       MockBackend(script))
    assert out.candidate_answers == ((0, "4"), (1, "9"), (2, "9"))
    assert out.final_answer == "9"


def test_summary_consolidates_all_answers():
    script = MockScript.parse('RULE "potential answers" THINK ANSWER \\boxed{11}\n'
                              "DEFAULT THINK ANSWER \\boxed{4}\n")
    out, backend = run(StrategySpec.summary(3), script, BudgetPolicy.disabled())
    consolidate = out.calls[-1]
    assert consolidate.role is CallRole.CONSOLIDATE
    assert consolidate.request_messages[-1][1].count("\\boxed{4}") == 3
    assert out.final_answer == "11"


def test_reflect_chains_feedback_into_history():
    script = MockScript.parse('RULE "grade" THINK ANSWER looks-wrong\nDEFAULT THINK ANSWER \\boxed{2}\n')
    out, _ = run(StrategySpec.reflect(2), script, BudgetPolicy.disabled())
    last = out.calls[-1]
    assert last.role is CallRole.REFINE
    history = last.request_messages
    assert [m[0] for m in history] == ["system", "user", "assistant", "user", "assistant", "user"]
    assert history[3][1] == "looks-wrong"


class FailingBackend(MockBackend):
    def __init__(self, script, fail_after):
        super().__init__(script)
        self.fail_after = fail_after

    def generate(self, request):
        if len(self.requests) >= self.fail_after:
            raise StatusError(500, "down")
        return super().generate(request)


def test_backend_failure_is_recorded_not_raised():
    backend = FailingBackend(judge_script(0), fail_after=2)
    out = run_strategy(StrategySpec.reflect(2), "q", BudgetPolicy.disabled(), PROMPTS, backend)
    assert out.error is not None and "error" in out.flags and "partial" in out.flags
    assert roles(out) == ["trace", "feedback"]
