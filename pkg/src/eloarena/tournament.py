"""Round orchestration: schedule, judge, batch-update, measure, checkpoint.

All matches of a round are judged against the ratings frozen at the start
of that round, and the resulting updates are applied together at the end.
Each instance plays at most once per round, so the order in which matches
finish has no effect on the post-round ratings.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .errors import CheckpointError, CurveUndefinedError, ValidationError
from .ingest import Instance, check_unique
from .judging import (
    DEFAULT_MAX_ATTEMPTS,
    ChatClient,
    JudgeKind,
    JudgeSpec,
    MatchRecord,
    Outcome,
    judge_pair,
)
from .metrics import auroc, pr_curve_and_auprc
from .prompts import COLA_PAIRWISE, PromptTemplate, get_template
from .rating import EloConfig, Rating, expected_score, init_ratings, rating_to_score
from .scheduling import (
    MatchHistory,
    RoundSchedule,
    SchedulerKind,
    record_round,
    round_rng,
    schedule_graph,
    schedule_random,
    schedule_swiss,
)

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
CHECKPOINT_NAME = "checkpoint.json"
MATCH_LOG_NAME = "matches.jsonl"
ROUND_METRICS_NAME = "round_metrics.csv"


@dataclass
class TournamentConfig:
    scheduler: SchedulerKind = SchedulerKind.RANDOM
    elo: EloConfig = field(default_factory=EloConfig)
    judge: JudgeSpec = field(default_factory=lambda: JudgeSpec(JudgeKind.ORACLE))
    rounds_target: int = 10
    template: str = COLA_PAIRWISE.name
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    parallelism: int = 1

    def __post_init__(self):
        self.scheduler = SchedulerKind(self.scheduler)
        if self.rounds_target < 1:
            raise ValidationError(f"rounds_target must be at least 1, got {self.rounds_target}")
        if self.max_attempts < 1:
            raise ValidationError("max_attempts must be at least 1")
        if self.parallelism < 1:
            raise ValidationError("parallelism must be at least 1")

    def to_json(self) -> dict:
        return {
            "scheduler": self.scheduler.value,
            "elo": {
                "k_factor": self.elo.k_factor,
                "init_center": self.elo.init_center,
                "init_spread": self.elo.init_spread,
                "seed": self.elo.seed,
            },
            "judge": self.judge.to_json(),
            "rounds_target": self.rounds_target,
            "template": self.template,
            "max_attempts": self.max_attempts,
            "parallelism": self.parallelism,
        }

    @classmethod
    def from_json(cls, d: dict) -> "TournamentConfig":
        return cls(
            scheduler=SchedulerKind(d["scheduler"]),
            elo=EloConfig(**d["elo"]),
            judge=JudgeSpec.from_json(d["judge"]),
            rounds_target=int(d["rounds_target"]),
            template=d["template"],
            max_attempts=int(d["max_attempts"]),
            parallelism=int(d["parallelism"]),
        )


@dataclass
class TournamentState:
    config: TournamentConfig
    ratings: dict[str, float]
    initial_ratings: dict[str, float]
    gold: dict[str, int | None] = field(default_factory=dict)
    round_index: int = 0
    history: MatchHistory = field(default_factory=MatchHistory)
    matches: list[MatchRecord] = field(default_factory=list)
    byes: list[str | None] = field(default_factory=list)
    per_round_metrics: list[tuple[int, float, float]] = field(default_factory=list)

    @property
    def seed(self) -> int:
        return self.config.elo.seed

    def rating_list(self) -> list[Rating]:
        return [Rating(i, e) for i, e in self.ratings.items()]

    def labeled(self) -> bool:
        return any(g is not None for g in self.gold.values())

    def scores(self) -> dict[str, float]:
        return {i: rating_to_score(e, self.config.elo.init_center) for i, e in self.ratings.items()}

    def to_json(self) -> dict:
        return {
            "version": CHECKPOINT_VERSION,
            "config": self.config.to_json(),
            "round_index": self.round_index,
            "rng_state": {"seed": self.seed, "round": self.round_index},
            "ratings": [[i, e] for i, e in self.ratings.items()],
            "initial_ratings": [[i, e] for i, e in self.initial_ratings.items()],
            "gold": [[i, g] for i, g in self.gold.items()],
            "history": self.history.to_json(),
            "matches": [m.to_json() for m in self.matches],
            "byes": self.byes,
            "per_round_metrics": [list(r) for r in self.per_round_metrics],
        }

    @classmethod
    def from_json(cls, d: dict) -> "TournamentState":
        if d.get("version") != CHECKPOINT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {d.get('version')!r}")
        return cls(
            config=TournamentConfig.from_json(d["config"]),
            ratings={str(i): float(e) for i, e in d["ratings"]},
            initial_ratings={str(i): float(e) for i, e in d["initial_ratings"]},
            gold={str(i): (None if g is None else int(g)) for i, g in d["gold"]},
            round_index=int(d["round_index"]),
            history=MatchHistory.from_json(d["history"]),
            matches=[MatchRecord.from_json(m) for m in d["matches"]],
            byes=list(d["byes"]),
            per_round_metrics=[(int(r), float(a), float(p)) for r, a, p in d["per_round_metrics"]],
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, TournamentState):
            return NotImplemented
        return self.to_json() == other.to_json()


def new_state(instances: Sequence[Instance], config: TournamentConfig) -> TournamentState:
    check_unique(instances)
    start = {r.instance_id: r.elo for r in init_ratings([x.id for x in instances], config.elo)}
    return TournamentState(config, dict(start), dict(start), {x.id: x.gold for x in instances})


def make_schedule(state: TournamentState, instances: Sequence[Instance]) -> RoundSchedule:
    ids = [x.id for x in instances]
    r = state.round_index
    kind = state.config.scheduler
    if kind is SchedulerKind.RANDOM:
        return schedule_random(ids, round_rng(state.seed, r), r)
    if kind is SchedulerKind.GRAPH:
        return schedule_graph(ids, state.history, len(ids), r)
    return schedule_swiss([Rating(i, state.ratings[i]) for i in ids], r)


def round_deltas(frozen: dict[str, float], records: Sequence[MatchRecord], k: float) -> dict[str, float]:
    """Rating changes implied by a round's records, all evaluated against ``frozen``."""
    deltas: dict[str, float] = {}
    for m in records:
        if m.outcome is Outcome.SKIPPED:
            continue
        w = 1.0 if m.outcome is Outcome.A_WINS else 0.0
        d = k * (w - expected_score(frozen[m.id_a], frozen[m.id_b]))
        deltas[m.id_a] = deltas.get(m.id_a, 0.0) + d
        deltas[m.id_b] = deltas.get(m.id_b, 0.0) - d
    return deltas


def apply_round_updates(frozen: dict[str, float], records: Sequence[MatchRecord], k: float) -> dict[str, float]:
    deltas = round_deltas(frozen, records, k)
    return {i: e + deltas.get(i, 0.0) for i, e in frozen.items()}


def ranking_metrics(ratings: dict[str, float], instances: Sequence[Instance]) -> tuple[float, float] | None:
    """(AUROC, AUPRC) of the ratings against the labeled instances, if both classes exist."""
    labeled = [x for x in instances if x.gold is not None]
    scores = [ratings[x.id] for x in labeled]
    gold = [x.gold for x in labeled]
    try:
        return auroc(scores, gold), pr_curve_and_auprc(scores, gold)[1]
    except CurveUndefinedError:
        return None


def _judge_all(state, instances, pairs, tpl, client) -> list[MatchRecord]:
    by_id = {x.id: x for x in instances}
    cfg = state.config

    def one(pair):
        a, b = pair
        return judge_pair(cfg.judge, tpl, by_id[a], by_id[b], cfg.max_attempts, state.round_index, client)

    if cfg.parallelism == 1 or len(pairs) < 2:
        return [one(p) for p in pairs]
    with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
        return list(pool.map(one, pairs))


def _template_for(config: TournamentConfig) -> PromptTemplate:
    return get_template(config.template, "pairwise")


def run_round(
    state: TournamentState,
    instances: Sequence[Instance],
    client: ChatClient | None = None,
    template: PromptTemplate | None = None,
) -> TournamentState:
    """Play one round and return the updated state (``state`` is mutated in place)."""
    cfg = state.config
    if state.round_index >= cfg.rounds_target:
        raise ValidationError(f"tournament already finished {cfg.rounds_target} rounds")
    if set(state.ratings) != {x.id for x in instances}:
        raise ValidationError("state ratings do not match the dataset's instance ids")
    cfg.judge.check_covers(instances)
    tpl = template or _template_for(cfg)

    schedule = make_schedule(state, instances)
    schedule.validate([x.id for x in instances])
    own_client = cfg.judge.kind is JudgeKind.REMOTE and client is None
    if own_client:
        client = ChatClient.from_spec(cfg.judge)
    try:
        records = _judge_all(state, instances, schedule.pairs, tpl, client)
    finally:
        if own_client:
            client.close()

    state.ratings = apply_round_updates(state.ratings, records, cfg.elo.k_factor)
    record_round(state.history, schedule)
    state.matches.extend(records)
    state.byes.append(schedule.bye)
    m = ranking_metrics(state.ratings, instances)
    if m is not None:
        state.per_round_metrics.append((state.round_index, *m))
    state.round_index += 1
    n_skipped = sum(r.outcome is Outcome.SKIPPED for r in records)
    logger.info("round %d: %d matches, %d skipped", state.round_index - 1, len(records), n_skipped)
    return state


def save_checkpoint(state: TournamentState, path) -> Path:
    """Write the state atomically: a crash mid-write leaves the previous file intact."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(state.to_json(), indent=1, sort_keys=True) + "\n"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def load_checkpoint(path) -> TournamentState:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        return TournamentState.from_json(data)
    except FileNotFoundError:
        raise CheckpointError(f"checkpoint not found: {path}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"checkpoint {path} is corrupt or truncated: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"checkpoint {path} is missing or has invalid fields: {exc!r}") from None


def checkpoint_roundtrip(state: TournamentState, path) -> TournamentState:
    save_checkpoint(state, path)
    return load_checkpoint(path)


def write_match_log(matches: Sequence[MatchRecord], path, append: bool = False) -> None:
    with Path(path).open("a" if append else "w", encoding="utf-8") as fh:
        for m in matches:
            fh.write(json.dumps(m.to_json(), sort_keys=True) + "\n")


def write_round_metrics(state: TournamentState, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["round", "auroc", "auprc"])
        for r, a, p in state.per_round_metrics:
            w.writerow([r, repr(a), repr(p)])


def run_tournament(
    instances: Sequence[Instance],
    config: TournamentConfig,
    out_dir=None,
    resume_from: TournamentState | None = None,
    client: ChatClient | None = None,
    on_round: Callable[[TournamentState], None] | None = None,
    stop_after: int | None = None,
) -> TournamentState:
    """Run (or continue) a tournament up to ``config.rounds_target`` rounds.

    With ``out_dir`` the checkpoint, match log and per-round metrics are
    rewritten after every round. ``stop_after`` ends early once that many
    rounds are complete, which is how tests simulate an interruption.
    """
    if resume_from is not None:
        config = resume_from.config
    if config.rounds_target < 1:
        raise ValidationError("rounds_target must be at least 1")
    instances = list(instances)
    check_unique(instances)
    config.judge.check_covers(instances)
    tpl = _template_for(config)
    state = resume_from if resume_from is not None else new_state(instances, config)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_match_log(state.matches, out / MATCH_LOG_NAME)
    limit = config.rounds_target if stop_after is None else min(stop_after, config.rounds_target)
    while state.round_index < limit:
        before = len(state.matches)
        run_round(state, instances, client, tpl)
        if out is not None:
            save_checkpoint(state, out / CHECKPOINT_NAME)
            write_match_log(state.matches[before:], out / MATCH_LOG_NAME, append=True)
            write_round_metrics(state, out / ROUND_METRICS_NAME)
        if on_round is not None:
            on_round(state)
    return state


def scored_instances(state: TournamentState):
    from .metrics import ScoredInstance

    scores = state.scores()
    return [ScoredInstance(i, scores[i], g) for i, g in state.gold.items() if g is not None]


def write_ratings_csv(state: TournamentState, path) -> None:
    scores = state.scores()
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "elo", "score", "gold"])
        for i, e in state.ratings.items():
            g = state.gold.get(i)
            w.writerow([i, repr(e), repr(scores[i]), "" if g is None else g])
