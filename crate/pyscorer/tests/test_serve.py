import io
import json

from hypothesis import given, strategies as st

from pyscorer import MockBackend, load_backend, serve


def session(*lines):
    out = io.StringIO()
    serve(MockBackend(), io.StringIO("".join(l + "\n" for l in lines)), out)
    return [json.loads(l) for l in out.getvalue().splitlines()]


def req(rid, text, direction="fwd"):
    return json.dumps({"id": rid, "dir": direction, "text": text})


def test_handshake_and_mock_scores():
    replies = session('{"proto": 1}', req(1, "abc"), req(2, ""), req(3, "先生が", "bwd"))
    assert replies == [
        {"proto": 1},
        {"id": 1, "logp": -3.0},
        {"id": 2, "logp": 0.0},
        {"id": 3, "logp": -3.0},
    ]


def test_malformed_lines_get_error_and_loop_continues():
    replies = session('{"proto": 1}', "{not json", '{"id": 4, "dir": "up", "text": "a"}', req(5, "ab"))
    assert replies[1]["id"] is None and "error" in replies[1]
    assert replies[2]["id"] is None
    assert replies[3] == {"id": 5, "logp": -2.0}


def test_bad_handshake_and_empty_input():
    assert session('{"proto": 2}')[0]["id"] is None
    assert session() == []


def test_neural_without_models_degrades_to_mock():
    assert load_backend("neural").kind == "MOCK"


@given(st.lists(st.text(), max_size=20))
def test_transcript_alternates_and_is_pure(texts):
    lines = ['{"proto": 1}'] + [req(i, t, "bwd" if i % 2 else "fwd") for i, t in enumerate(texts)]
    first, second = session(*lines), session(*lines)
    assert first == second
    assert first[0] == {"proto": 1}
    assert [r["id"] for r in first[1:]] == list(range(len(texts)))
    assert all(r["logp"] == -len(t) for r, t in zip(first[1:], texts))
