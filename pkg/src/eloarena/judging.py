"""Match judges: a remote chat-completions model or one of three simulators.

Simulated judges draw from a generator seeded by (seed, round, id_a, id_b),
so outcomes do not depend on the order or thread in which matches run.
"""

from __future__ import annotations

import logging
import math
import os
import threading
import time
import zlib
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Mapping

import httpx
import numpy as np

from .errors import JudgeSetupError
from .ingest import Instance
from .prompts import (
    Choice,
    Label,
    PromptStyle,
    PromptTemplate,
    extract_choice,
    extract_label,
    pairwise_values,
    render,
    render_single,
)
from .rating import expected_score

logger = logging.getLogger(__name__)

API_KEY_ENV = "ARENA_API_KEY"
DEFAULT_MAX_ATTEMPTS = 3

_JUDGE_STREAM = 0x7D6E
_CLASSIFY_STREAM = 0x7D6F


class JudgeKind(str, Enum):
    REMOTE = "remote"
    ORACLE = "oracle"
    NOISY_BT = "noisy-bt"
    LABEL_FLIP = "label-flip"


class Outcome(str, Enum):
    A_WINS = "A_WINS"
    B_WINS = "B_WINS"
    SKIPPED = "SKIPPED"


@dataclass
class MatchRecord:
    round_index: int
    id_a: str
    id_b: str
    outcome: Outcome
    raw_response: str = ""
    attempts: int = 1

    def to_json(self) -> dict:
        d = asdict(self)
        d["outcome"] = self.outcome.value
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "MatchRecord":
        return cls(int(d["round_index"]), str(d["id_a"]), str(d["id_b"]), Outcome(d["outcome"]),
                   str(d.get("raw_response", "")), int(d.get("attempts", 1)))


@dataclass
class JudgeSpec:
    kind: JudgeKind
    seed: int = 0
    # remote
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4o-mini-2024-07-18"
    temperature: float = 0.0
    max_tokens: int = 256
    timeout: float = 60.0
    max_in_flight: int = 4
    retry_backoff: float = 1.0
    api_key_env: str = API_KEY_ENV
    # simulated
    hidden: dict[str, float] = field(default_factory=dict)
    epsilon: float = 0.0
    decision_threshold: float | None = None

    def __post_init__(self):
        self.kind = JudgeKind(self.kind)
        if not 0.0 <= self.epsilon <= 0.5:
            raise JudgeSetupError(f"flip probability must lie in [0, 0.5], got {self.epsilon}")
        bad = [k for k, v in self.hidden.items() if not math.isfinite(v)]
        if bad:
            raise JudgeSetupError(f"hidden qualities must be finite; bad ids {bad[:5]}")
        if self.max_in_flight < 1:
            raise JudgeSetupError("max_in_flight must be at least 1")

    def check_covers(self, instances) -> None:
        """Raise before any judging if the spec cannot decide matches among ``instances``."""
        if self.kind in (JudgeKind.ORACLE, JudgeKind.NOISY_BT):
            missing = [x.id for x in instances if x.id not in self.hidden]
            if missing:
                raise JudgeSetupError(f"{self.kind.value} judge lacks hidden quality for ids {missing[:5]}")
        elif self.kind is JudgeKind.LABEL_FLIP:
            missing = [x.id for x in instances if x.gold is None]
            if missing:
                raise JudgeSetupError(f"label-flip judge needs gold labels; unlabeled ids {missing[:5]}")
        elif not os.environ.get(self.api_key_env):
            raise JudgeSetupError(f"remote judge needs an API key in ${self.api_key_env}")

    def to_json(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "JudgeSpec":
        return cls(**dict(d))


class ChatClient:
    """Minimal chat-completions client with a bound on in-flight requests."""

    def __init__(self, endpoint: str, model: str, api_key: str, temperature: float = 0.0,
                 max_tokens: int = 256, timeout: float = 60.0, max_in_flight: int = 4,
                 transport: httpx.BaseTransport | None = None):
        self.endpoint = endpoint
        self.model = model
        self.temperature = temperature
        self.max_tokens = max_tokens
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._http = httpx.Client(
            timeout=timeout,
            headers={"Authorization": f"Bearer {api_key}"},
            transport=transport,
        )

    @classmethod
    def from_spec(cls, spec: JudgeSpec, transport: httpx.BaseTransport | None = None) -> "ChatClient":
        key = os.environ.get(spec.api_key_env)
        if not key:
            raise JudgeSetupError(f"remote judge needs an API key in ${spec.api_key_env}")
        return cls(spec.endpoint, spec.model, key, spec.temperature, spec.max_tokens,
                   spec.timeout, spec.max_in_flight, transport)

    def complete(self, prompt: str) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }
        with self._slots:
            resp = self._http.post(self.endpoint, json=payload)
        resp.raise_for_status()
        content = resp.json()["choices"][0]["message"]["content"]
        return content if isinstance(content, str) else ""

    def close(self) -> None:
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _id_hash(s: str) -> int:
    return zlib.crc32(s.encode("utf-8"))


def match_rng(seed: int, round_index: int, id_a: str, id_b: str, stream: int = _JUDGE_STREAM) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([int(seed), stream, int(round_index), _id_hash(id_a), _id_hash(id_b)])
    )


def _ask(client: ChatClient, prompt: str) -> str | None:
    try:
        return client.complete(prompt)
    except (httpx.HTTPError, KeyError, IndexError, TypeError, ValueError) as exc:
        logger.warning("judge request failed: %s", exc)
        return None


def judge_pair(
    judge: JudgeSpec,
    tpl: PromptTemplate,
    a: Instance,
    b: Instance,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    round_index: int = 0,
    client: ChatClient | None = None,
) -> MatchRecord:
    """Decide one match between ``a`` (slot 1) and ``b`` (slot 2).

    Remote judging re-renders and re-asks up to ``max_attempts`` times;
    transport errors and unparseable answers both consume an attempt, and
    running out yields a SKIPPED record instead of an exception.
    """
    if max_attempts < 1:
        raise JudgeSetupError("max_attempts must be at least 1")
    kind = judge.kind
    if kind is JudgeKind.REMOTE:
        own = client is None
        client = client or ChatClient.from_spec(judge)
        raw = ""
        try:
            for attempt in range(1, max_attempts + 1):
                prompt = render(tpl, pairwise_values(a.fields, b.fields))
                text = _ask(client, prompt)
                if text is not None:
                    raw = text
                    choice = extract_choice(text, tpl)
                    if choice is not None:
                        outcome = Outcome.A_WINS if choice is Choice.A else Outcome.B_WINS
                        return MatchRecord(round_index, a.id, b.id, outcome, raw, attempt)
                if attempt < max_attempts and judge.retry_backoff > 0:
                    time.sleep(judge.retry_backoff * 2 ** (attempt - 1))
        finally:
            if own:
                client.close()
        logger.info("round %d: skipping %s vs %s after %d attempts", round_index, a.id, b.id, max_attempts)
        return MatchRecord(round_index, a.id, b.id, Outcome.SKIPPED, raw, max_attempts)

    rng = match_rng(judge.seed, round_index, a.id, b.id)
    if kind is JudgeKind.ORACLE:
        a_wins = judge.hidden[a.id] > judge.hidden[b.id]
    elif kind is JudgeKind.NOISY_BT:
        a_wins = rng.random() < expected_score(judge.hidden[a.id], judge.hidden[b.id])
    else:
        if a.gold is None or b.gold is None:
            raise JudgeSetupError("label-flip judge needs gold labels on both instances")
        if a.gold == b.gold:
            a_wins = bool(rng.random() < 0.5)
        else:
            a_wins = a.gold > b.gold
        if rng.random() < judge.epsilon:
            a_wins = not a_wins
    outcome = Outcome.A_WINS if a_wins else Outcome.B_WINS
    return MatchRecord(round_index, a.id, b.id, outcome, "", 1)


@dataclass
class Classification:
    instance_id: str
    label: Label | None
    raw_response: str = ""
    attempts: int = 1
    prompt: str = ""

    def to_json(self) -> dict:
        return {
            "id": self.instance_id,
            "prediction": None if self.label is None else self.label.value,
            "raw_response": self.raw_response,
            "attempts": self.attempts,
        }


def classify_instance(
    judge: JudgeSpec,
    tpl: PromptTemplate,
    x: Instance,
    style: PromptStyle = PromptStyle.PLAIN,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    client: ChatClient | None = None,
) -> Classification:
    style = PromptStyle(style)
    prompt = render_single(tpl, x.fields, style)
    if judge.kind is JudgeKind.REMOTE:
        own = client is None
        client = client or ChatClient.from_spec(judge)
        raw = ""
        try:
            for attempt in range(1, max_attempts + 1):
                text = _ask(client, prompt)
                if text is not None:
                    raw = text
                    label = extract_label(text, tpl)
                    if label is not None:
                        return Classification(x.id, label, raw, attempt, prompt)
                if attempt < max_attempts and judge.retry_backoff > 0:
                    time.sleep(judge.retry_backoff * 2 ** (attempt - 1))
        finally:
            if own:
                client.close()
        return Classification(x.id, None, raw, max_attempts, prompt)

    rng = match_rng(judge.seed, 0, x.id, "", _CLASSIFY_STREAM)
    if judge.kind is JudgeKind.LABEL_FLIP:
        if x.gold is None:
            raise JudgeSetupError("label-flip judge needs gold labels")
        pos = bool(x.gold)
        if rng.random() < judge.epsilon:
            pos = not pos
    else:
        cut = judge.decision_threshold
        if cut is None:
            cut = float(np.median(list(judge.hidden.values())))
        q = judge.hidden[x.id]
        if judge.kind is JudgeKind.ORACLE:
            pos = q > cut
        else:
            pos = rng.random() < expected_score(q, cut)
    return Classification(x.id, Label.POS if pos else Label.NEG, "", 1, prompt)


def classify_single(
    judge: JudgeSpec,
    tpl: PromptTemplate,
    x: Instance,
    style: PromptStyle = PromptStyle.PLAIN,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    client: ChatClient | None = None,
) -> Label | None:
    """Zero-shot label for one instance, or None when no answer could be extracted."""
    return classify_instance(judge, tpl, x, style, max_attempts, client).label
