import threading
import time

import httpx
import numpy as np
import pytest

from eloarena.errors import JudgeSetupError
from eloarena.ingest import Instance
from eloarena.judging import (
    ChatClient,
    JudgeKind,
    JudgeSpec,
    MatchRecord,
    Outcome,
    classify_instance,
    classify_single,
    judge_pair,
)
from eloarena.prompts import CLINIFACT_SINGLE, COLA_PAIRWISE, COLA_SINGLE, Label, PromptStyle
from eloarena.rating import expected_score

A = Instance("a", {"text": "The dog barked."}, 1)
B = Instance("b", {"text": "Dog the barked."}, 0)


def remote(url, **kw):
    return JudgeSpec(JudgeKind.REMOTE, endpoint=url, model="fixture-model", retry_backoff=0.0, **kw)


def test_oracle():
    j = JudgeSpec(JudgeKind.ORACLE, hidden={"a": 2.0, "b": 1.0})
    assert judge_pair(j, COLA_PAIRWISE, A, B).outcome is Outcome.A_WINS
    assert judge_pair(j, COLA_PAIRWISE, B, A).outcome is Outcome.B_WINS


def test_oracle_slot_fidelity():
    rng = np.random.default_rng(0)
    q = {str(i): float(v) for i, v in enumerate(rng.normal(size=30))}
    xs = [Instance(i, {"text": i}) for i in q]
    j = JudgeSpec(JudgeKind.ORACLE, hidden=q)
    for x in xs:
        for y in xs:
            if x.id == y.id:
                continue
            r1 = judge_pair(j, COLA_PAIRWISE, x, y)
            r2 = judge_pair(j, COLA_PAIRWISE, y, x)
            w1 = x.id if r1.outcome is Outcome.A_WINS else y.id
            w2 = y.id if r2.outcome is Outcome.A_WINS else x.id
            assert w1 == w2


def test_noisy_bt_equal_quality_is_fair_coin():
    j = JudgeSpec(JudgeKind.NOISY_BT, hidden={"a": 0.0, "b": 0.0}, seed=1)
    wins = sum(judge_pair(j, COLA_PAIRWISE, A, B, round_index=r).outcome is Outcome.A_WINS for r in range(10_000))
    assert abs(wins / 10_000 - 0.5) <= 0.03


@pytest.mark.parametrize("gap", [100.0, 400.0])
def test_noisy_bt_calibration(gap):
    j = JudgeSpec(JudgeKind.NOISY_BT, hidden={"a": gap, "b": 0.0}, seed=2)
    n = 10_000
    p = expected_score(gap, 0.0)
    wins = sum(judge_pair(j, COLA_PAIRWISE, A, B, round_index=r).outcome is Outcome.A_WINS for r in range(n))
    assert abs(wins / n - p) <= 3 * np.sqrt(p * (1 - p) / n)


def test_simulated_judges_are_deterministic():
    for kind in (JudgeKind.NOISY_BT, JudgeKind.LABEL_FLIP):
        j = JudgeSpec(kind, hidden={"a": 0.0, "b": 10.0}, epsilon=0.3, seed=9)
        first = [judge_pair(j, COLA_PAIRWISE, A, B, round_index=r).outcome for r in range(200)]
        again = [judge_pair(j, COLA_PAIRWISE, A, B, round_index=r).outcome for r in range(200)]
        assert first == again


def test_label_flip():
    clean = JudgeSpec(JudgeKind.LABEL_FLIP, epsilon=0.0)
    assert judge_pair(clean, COLA_PAIRWISE, A, B).outcome is Outcome.A_WINS
    assert judge_pair(clean, COLA_PAIRWISE, B, A).outcome is Outcome.B_WINS
    noisy = JudgeSpec(JudgeKind.LABEL_FLIP, epsilon=0.2, seed=4)
    flips = sum(judge_pair(noisy, COLA_PAIRWISE, A, B, round_index=r).outcome is Outcome.B_WINS for r in range(10_000))
    assert abs(flips / 10_000 - 0.2) <= 3 * np.sqrt(0.2 * 0.8 / 10_000)
    tie = Instance("c", {"text": "x"}, 1)
    heads = sum(judge_pair(clean, COLA_PAIRWISE, A, tie, round_index=r).outcome is Outcome.A_WINS for r in range(4000))
    assert abs(heads / 4000 - 0.5) < 0.05


@pytest.mark.parametrize("eps", [-0.1, 0.6])
def test_label_flip_epsilon_range(eps):
    with pytest.raises(JudgeSetupError):
        JudgeSpec(JudgeKind.LABEL_FLIP, epsilon=eps)


def test_hidden_must_be_finite():
    with pytest.raises(JudgeSetupError):
        JudgeSpec(JudgeKind.ORACLE, hidden={"a": float("nan")})


def test_check_covers():
    with pytest.raises(JudgeSetupError, match="hidden quality"):
        JudgeSpec(JudgeKind.ORACLE, hidden={"a": 1.0}).check_covers([A, B])
    with pytest.raises(JudgeSetupError, match="gold"):
        JudgeSpec(JudgeKind.LABEL_FLIP).check_covers([Instance("u", {"text": "x"})])


def test_remote_requires_key(monkeypatch):
    monkeypatch.delenv("ARENA_API_KEY", raising=False)
    with pytest.raises(JudgeSetupError, match="ARENA_API_KEY"):
        remote("http://127.0.0.1:9/x").check_covers([A])
    with pytest.raises(JudgeSetupError):
        judge_pair(remote("http://127.0.0.1:9/x"), COLA_PAIRWISE, A, B)


def test_record_json_roundtrip():
    r = MatchRecord(3, "a", "b", Outcome.SKIPPED, "garbage", 3)
    assert MatchRecord.from_json(r.to_json()) == r


# -- remote, against a local fixture server ----------------------------------

def test_remote_wire_format(fixture_server, api_key):
    srv = fixture_server(lambda prompt: '{"choice": "Sentence 2", "reasoning": "r"}')
    rec = judge_pair(remote(srv.url, temperature=0.0, max_tokens=64), COLA_PAIRWISE, A, B, round_index=4)
    assert rec.outcome is Outcome.B_WINS and rec.attempts == 1 and rec.round_index == 4
    assert rec.raw_response.startswith('{"choice"')
    req = srv.requests[0]
    assert req["auth"] == "Bearer test-key"
    body = req["body"]
    assert body["model"] == "fixture-model"
    assert body["temperature"] == 0.0 and body["max_tokens"] == 64
    assert len(body["messages"]) == 1 and body["messages"][0]["role"] == "user"
    assert "Sentence 1: The dog barked." in body["messages"][0]["content"]


def test_remote_unparseable_is_skipped(fixture_server, api_key):
    srv = fixture_server(lambda prompt: "I would rather not say.")
    rec = judge_pair(remote(srv.url), COLA_PAIRWISE, A, B, max_attempts=3)
    assert rec.outcome is Outcome.SKIPPED
    assert rec.attempts == 3
    assert len(srv.requests) == 3


def test_remote_retries_then_succeeds(fixture_server, api_key):
    calls = []

    def reply(prompt):
        calls.append(prompt)
        return 503 if len(calls) == 1 else ("hmm" if len(calls) == 2 else "Sentence 1")

    srv = fixture_server(reply)
    rec = judge_pair(remote(srv.url), COLA_PAIRWISE, A, B, max_attempts=3)
    assert rec.outcome is Outcome.A_WINS and rec.attempts == 3
    assert calls[0] == calls[2]  # re-rendered identically


def test_remote_transport_failure_is_skipped(api_key):
    rec = judge_pair(remote("http://127.0.0.1:9/v1/chat/completions", timeout=0.5), COLA_PAIRWISE, A, B, max_attempts=2)
    assert rec.outcome is Outcome.SKIPPED and rec.attempts == 2


def test_chat_client_malformed_body(api_key):
    transport = httpx.MockTransport(lambda req: httpx.Response(200, json={"nope": 1}))
    client = ChatClient.from_spec(remote("http://judge.test/v1"), transport=transport)
    rec = judge_pair(remote("http://judge.test/v1"), COLA_PAIRWISE, A, B, max_attempts=2, client=client)
    assert rec.outcome is Outcome.SKIPPED


def test_chat_client_bounds_in_flight(api_key):
    live = peak = 0
    lock = threading.Lock()

    def handler(req):
        nonlocal live, peak
        with lock:
            live += 1
            peak = max(peak, live)
        time.sleep(0.02)
        with lock:
            live -= 1
        return httpx.Response(200, json={"choices": [{"message": {"content": "Sentence 1"}}]})

    spec = remote("http://judge.test/v1", max_in_flight=2)
    client = ChatClient.from_spec(spec, transport=httpx.MockTransport(handler))
    threads = [threading.Thread(target=client.complete, args=("p",)) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert peak <= 2


# -- single-instance classification ------------------------------------------

def test_classify_yes_cola(fixture_server, api_key):
    srv = fixture_server(lambda prompt: "Yes")
    assert classify_single(remote(srv.url), COLA_SINGLE, A) is Label.POS


def test_classify_false_clinifact(fixture_server, api_key):
    srv = fixture_server(lambda prompt: "FALSE")
    assert classify_single(remote(srv.url), CLINIFACT_SINGLE, A) is Label.NEG


def test_classify_styles_on_the_wire(fixture_server, api_key):
    srv = fixture_server(lambda prompt: "No")
    classify_single(remote(srv.url), COLA_SINGLE, A, PromptStyle.PRECISION)
    classify_single(remote(srv.url), COLA_SINGLE, A, PromptStyle.PLAIN)
    prec, plain = (r["body"]["messages"][0]["content"] for r in srv.requests)
    assert "The consequences for wrongly guessing Yes are worse" in prec
    assert "wrongly guessing" not in plain


def test_classify_failure_is_none(fixture_server, api_key):
    srv = fixture_server(lambda prompt: "???")
    c = classify_instance(remote(srv.url), COLA_SINGLE, A, max_attempts=2)
    assert c.label is None and c.attempts == 2


def test_classify_simulated():
    flip = JudgeSpec(JudgeKind.LABEL_FLIP)
    assert classify_single(flip, COLA_SINGLE, A) is Label.POS
    assert classify_single(flip, COLA_SINGLE, B) is Label.NEG
    oracle = JudgeSpec(JudgeKind.ORACLE, hidden={"a": 5.0, "b": -5.0})
    assert classify_single(oracle, COLA_SINGLE, A) is Label.POS
    assert classify_single(oracle, COLA_SINGLE, B) is Label.NEG
