import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from budgetlab.backend import GenerationRequest, MockBackend, MockScript
from budgetlab.core import BudgetPolicy
from budgetlab.forcing import ClosedBy, force_thinking
from oracles import random_forcing_case

REQ = GenerationRequest((("user", "q"),))


def forced(script, policy, chunk=1, filler="Wait"):
    backend = MockBackend(MockScript.parse(script), chunk_tokens=chunk)
    return force_thinking(backend, REQ, policy, filler=filler), backend


def test_premature_close_is_extended_with_wait():
    trace, backend = forced("DEFAULT THINK t*120 </think> t*400 ANSWER \\boxed{5}\n",
                            BudgetPolicy(True, 300, 556))
    assert trace.closed_by is ClosedBy.MODEL_CHOICE
    assert trace.force_injections == 1
    assert trace.think_tokens == 521
    assert trace.think_text.split().count("Wait") == 1
    assert trace.answer_text == "\\boxed{5}"
    # first call, the continuation, then the answer phase
    assert len(backend.requests) == 3
    assert backend.requests[1].assistant_prefix.startswith("<think>")
    assert backend.requests[2].assistant_prefix.endswith("</think>")


def test_cap_forces_closure():
    trace, _ = forced("DEFAULT THINK t*5000 ANSWER \\boxed{5}\n", BudgetPolicy(True, 300, 556), chunk=7)
    assert trace.closed_by is ClosedBy.FORCED_CLOSE
    assert trace.think_tokens == 560
    assert trace.max_chunk_tokens == 7
    assert trace.answer_text == "\\boxed{5}"


def test_close_above_floor_is_model_choice():
    trace, backend = forced("DEFAULT THINK t*50 ANSWER \\boxed{2}\n", BudgetPolicy(True, 10, 100))
    assert (trace.closed_by, trace.think_tokens, trace.force_injections) == (ClosedBy.MODEL_CHOICE, 50, 0)


def test_exhausted_injections_are_flagged():
    trace, _ = forced("DEFAULT THINK t </think> </think> </think> ANSWER x\n",
                      BudgetPolicy(True, 100, 200, max_force_iterations=2))
    assert trace.closed_by is ClosedBy.EXHAUSTED and trace.under_budget
    assert trace.force_injections == 2


def test_disabled_policy_single_call_without_markers():
    trace, backend = forced("DEFAULT THINK t*9 ANSWER \\boxed{3}\n", BudgetPolicy.disabled())
    assert trace.closed_by is ClosedBy.DISABLED
    assert trace.think_tokens == 0 and trace.think_text == ""
    assert len(backend.requests) == 1
    sent = backend.requests[0]
    assert not sent.enable_thinking and sent.max_tokens == 4096
    assert "<think>" not in sent.assistant_prefix


def test_custom_filler():
    trace, _ = forced("DEFAULT THINK t </think> t*20 ANSWER x\n", BudgetPolicy(True, 5, 30),
                      filler="Hmm")
    assert "Hmm" in trace.think_text and "Wait" not in trace.think_text


def test_prefix_rejected():
    with pytest.raises(ValueError):
        force_thinking(MockBackend(MockScript.parse("DEFAULT THINK ANSWER x\n")),
                       GenerationRequest((("user", "q"),), assistant_prefix="<think>"),
                       BudgetPolicy(True, 1, 2))


@settings(max_examples=300)
@given(st.randoms(use_true_random=False))
def test_floor_ceiling_and_injection_bounds(rnd):
    script, chunk, kw = random_forcing_case(rnd)
    policy = BudgetPolicy(**kw)
    trace, _ = forced(script, policy, chunk)
    if trace.closed_by is ClosedBy.MODEL_CHOICE:
        assert trace.think_tokens >= policy.min_think_tokens
    assert trace.think_tokens <= policy.max_think_tokens + trace.max_chunk_tokens
    assert trace.max_chunk_tokens <= chunk
    assert trace.force_injections <= policy.max_force_iterations
    if trace.closed_by is ClosedBy.EXHAUSTED:
        assert trace.force_injections == policy.max_force_iterations


@settings(max_examples=50)
@given(st.integers(0, 2**32))
def test_forcing_is_deterministic(seed):
    script, chunk, kw = random_forcing_case(random.Random(seed))
    a, _ = forced(script, BudgetPolicy(**kw), chunk)
    b, _ = forced(script, BudgetPolicy(**kw), chunk)
    strip = lambda t: (t.think_text, t.answer_text, t.think_tokens, t.force_injections, t.closed_by)
    assert strip(a) == strip(b)


def test_floor_zero_accepts_first_closure():
    trace, backend = forced("DEFAULT THINK t*3 </think> t*50 ANSWER \\boxed{1}\n", BudgetPolicy(True, 0, 256))
    assert trace.closed_by is ClosedBy.MODEL_CHOICE
    assert (trace.force_injections, trace.think_tokens) == (0, 3)
