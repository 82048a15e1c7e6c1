import pytest
from hypothesis import given
from hypothesis import strategies as st

from budgetlab.backend import FinishReason, ProtocolError, Segment, collect
from budgetlab.backend.classify import RawDelta, classify_stream


def run(deltas, **kw):
    return collect(classify_stream(deltas, **kw))


def test_split_markers():
    got = run(["<th", "ink>a b", " c</thi", "nk>\\boxed{1}"])
    assert got.think_text == "a b c"
    assert got.answer_text == "\\boxed{1}"
    assert got.finish_reason is FinishReason.STOP


def test_no_markers_is_all_answer():
    got = run(["just ", "an answer"])
    assert got.think_text == "" and got.think_tokens == 0
    assert got.answer_text == "just an answer"


def test_partial_marker_lookalike_is_released():
    got = run(["x <th", "e end"])
    assert got.answer_text == "x <the end"


def test_reasoning_field_then_content():
    got = run([RawDelta(reasoning="step one"), RawDelta(reasoning=", two"),
               RawDelta(content="\\boxed{2}"), RawDelta(finish_reason="stop", usage_tokens=9)])
    assert got.think_text == "step one, two"
    assert got.answer_text == "\\boxed{2}"
    assert got.think_tokens + got.answer_tokens == 9


def test_stop_on_close_emits_think_close_and_drops_answer():
    got = run(["<think>abc", "</think>", "ignored"], stop_on_think_close=True)
    assert got.finish_reason is FinishReason.THINK_CLOSE
    assert got.answer_text == ""
    assert got.chunks[-1].segment is Segment.THINK


def test_continuation_starts_in_think():
    got = run(["more", " thought"], start_in_think=True)
    assert got.think_text == "more thought"
    assert got.answer_text == ""


def test_length_finish():
    got = run([RawDelta(content="<think>a"), RawDelta(content=" b", finish_reason="length")])
    assert got.finish_reason is FinishReason.LENGTH
    assert got.think_text == "a b"


@pytest.mark.parametrize(
    "deltas, fragment",
    [
        (["</think>x"], "before"),
        (["<think>a<think>"], "nested"),
        (["<think>a</think>b</think>"], "answer"),
        ([RawDelta(content="x"), RawDelta(reasoning="late")], "reasoning"),
    ],
)
def test_protocol_errors(deltas, fragment):
    with pytest.raises(ProtocolError, match=fragment):
        run(deltas)


def _pieces(text, cuts):
    cuts = sorted(set(c for c in cuts if 0 < c < len(text)))
    out, last = [], 0
    for c in cuts:
        out.append(text[last:c])
        last = c
    out.append(text[last:])
    return out


words = st.text(alphabet="abc xyz{}\\", min_size=0, max_size=30)


@given(words, words, st.lists(st.integers(0, 80), max_size=12))
def test_any_split_gives_same_segments(think, answer, cuts):
    full = f"<think>{think}</think>{answer}"
    got = run(_pieces(full, cuts))
    assert got.think_text == think
    assert got.answer_text == answer


@given(words, words, st.lists(st.integers(0, 80), max_size=12), st.integers(0, 200))
def test_token_conservation_with_usage(think, answer, cuts, extra):
    pieces = _pieces(f"<think>{think}</think>{answer}", cuts)
    deltas = [RawDelta(content=p) for p in pieces]
    emitted = sum(1 for _ in classify_stream(deltas) if _.text_delta)
    usage = emitted + extra
    got = run(deltas + [RawDelta(usage_tokens=usage)])
    assert sum(c.token_count for c in got.chunks) == usage
    assert got.chunks[-1].usage_tokens == usage
    assert [c.finished for c in got.chunks].count(True) == 1


@given(words, st.lists(st.integers(0, 60), max_size=8))
def test_think_always_precedes_answer(text, cuts):
    got = run(_pieces(f"<think>{text}</think>ans", cuts))
    segments = [c.segment for c in got.chunks[:-1] if c.text_delta]
    if Segment.ANSWER in segments:
        first = segments.index(Segment.ANSWER)
        assert Segment.THINK not in segments[first:]
