import pytest
from hypothesis import given
from hypothesis import strategies as st

from budgetlab.backend import (
    FinishReason,
    GenerationRequest,
    MockBackend,
    MockScript,
    Segment,
    collect,
)
from budgetlab.backend.mock import ScriptError

SCRIPT = """
# toy script
RULE "grader" THINK ANSWER CORRECT
RULE seven SEED 2 THINK s*3 ANSWER \\boxed{2}
DEFAULT THINK Think*5 ANSWER Answer*3
"""


def req(text="q", **kw):
    return GenerationRequest((("user", text),), **kw)


def test_think_then_answer_counts():
    got = collect(MockBackend(MockScript.parse(SCRIPT)).generate(req()))
    assert (got.think_tokens, got.answer_tokens) == (5, 3)
    assert got.think_text == "Think Think Think Think Think"
    assert got.answer_text == "Answer Answer Answer"
    assert got.finish_reason is FinishReason.STOP


def test_rule_matching_and_seed():
    mock = MockBackend(MockScript.parse(SCRIPT))
    assert collect(mock.generate(req("a grader here"))).answer_text == "CORRECT"
    assert collect(mock.generate(req("seven", seed=2))).answer_text == "\\boxed{2}"
    assert collect(mock.generate(req("seven", seed=3))).answer_text == "Answer Answer Answer"
    assert len(mock.requests) == 3


def test_stop_on_think_close():
    got = collect(MockBackend(MockScript.parse(SCRIPT)).generate(req(stop_on_think_close=True)))
    assert got.finish_reason is FinishReason.THINK_CLOSE
    assert got.answer_tokens == 0 and got.think_tokens == 5


def test_length_cut():
    got = collect(MockBackend(MockScript.parse(SCRIPT)).generate(req(max_tokens=4)))
    assert got.finish_reason is FinishReason.LENGTH
    assert got.think_tokens == 4


def test_disabled_thinking_answers_only():
    got = collect(MockBackend(MockScript.parse(SCRIPT)).generate(req(enable_thinking=False)))
    assert got.think_tokens == 0 and got.answer_tokens == 3


def test_continuation_resumes_after_prefix():
    script = MockScript.parse("DEFAULT THINK a b </think> c d ANSWER x\n")
    mock = MockBackend(script)
    first = collect(mock.generate(req(stop_on_think_close=True)))
    assert first.think_text == "a b"
    cont = collect(mock.generate(req(stop_on_think_close=True, assistant_prefix="<think>a b Wait")))
    assert cont.think_text == " c d"
    closed = collect(mock.generate(req(assistant_prefix="<think>a b Wait c d </think>")))
    assert closed.answer_text == "x" and closed.think_tokens == 0


def test_chunking():
    mock = MockBackend(MockScript.parse(SCRIPT), chunk_tokens=2)
    got = collect(mock.generate(req()))
    assert got.max_chunk_tokens == 2
    assert got.think_text == "Think Think Think Think Think"
    sizes = [c.token_count for c in got.chunks if c.segment is Segment.THINK and c.text_delta]
    assert sizes == [2, 2, 1]


@pytest.mark.parametrize(
    "text, line",
    [
        ("RULE x THINK a ANSWER b\n", None),
        ("DEFAULT THINK a ANSWER b\nRULE x THINK a ANSWER b\n", 2),
        ("BOGUS\nDEFAULT THINK ANSWER\n", 1),
        ('RULE "open THINK a ANSWER b\nDEFAULT THINK ANSWER\n', 1),
        ("RULE x SEED nope THINK ANSWER\nDEFAULT THINK ANSWER\n", 1),
        ("RULE x ANSWER a\nDEFAULT THINK ANSWER\n", 1),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ScriptError) as info:
        MockScript.parse(text)
    assert info.value.line == line


def test_dump_round_trip():
    script = MockScript.parse(SCRIPT)
    assert MockScript.parse(script.dump()) == script


@given(st.integers(0, 40), st.integers(0, 10), st.integers(1, 6), st.integers(1, 60), st.integers(0, 9))
def test_deterministic_and_bounded(n_think, n_answer, chunk, cap, seed):
    script = MockScript.parse(f"DEFAULT THINK {'t ' * n_think} ANSWER {'a ' * n_answer}\n")
    a = collect(MockBackend(script, chunk_tokens=chunk).generate(req(max_tokens=cap, seed=seed)))
    b = collect(MockBackend(script, chunk_tokens=chunk).generate(req(max_tokens=cap, seed=seed)))
    assert [(c.text_delta, c.token_count) for c in a.chunks] == [
        (c.text_delta, c.token_count) for c in b.chunks]
    assert a.think_tokens + a.answer_tokens <= cap + chunk - 1
