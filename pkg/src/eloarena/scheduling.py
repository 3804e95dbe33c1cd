"""Round pairing strategies and the played-matches history they consult.

Three strategies are provided:

* ``random``: a uniformly random matching per round, repeats allowed.
* ``graph``: farthest-first pairing on the graph of matches already played.
* ``swiss``: rank by rating, cut into groups of eight, pair position ``i``
  with position ``7 - i`` inside each group.

Every scheduler returns a :class:`RoundSchedule` in which each id occurs in
exactly one pair or as the single bye of an odd-sized round.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .rating import Rating

SWISS_GROUP_SIZE = 8

_SCHEDULE_STREAM = 0x5C4E


class SchedulerKind(str, Enum):
    RANDOM = "random"
    GRAPH = "graph"
    SWISS = "swiss"


@dataclass
class RoundSchedule:
    round_index: int
    pairs: list[tuple[str, str]]
    bye: str | None = None

    def ids(self) -> list[str]:
        out = [x for p in self.pairs for x in p]
        if self.bye is not None:
            out.append(self.bye)
        return out

    def validate(self, ids: Sequence[str]) -> None:
        seen = self.ids()
        if len(seen) != len(set(seen)):
            raise ValidationError(f"round {self.round_index}: an id is scheduled more than once")
        if any(a == b for a, b in self.pairs):
            raise ValidationError(f"round {self.round_index}: self-pairing")
        if set(seen) != set(ids):
            raise ValidationError(f"round {self.round_index}: schedule does not cover the pool")
        if (self.bye is not None) != (len(ids) % 2 == 1):
            raise ValidationError(f"round {self.round_index}: bye must be set iff the pool is odd")


def _key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass
class MatchHistory:
    """Symmetric record of which pairs have met and how often."""

    adjacency: dict[str, set[str]] = field(default_factory=dict)
    counts: dict[tuple[str, str], int] = field(default_factory=dict)

    def played(self, a: str, b: str) -> bool:
        return b in self.adjacency.get(a, ())

    def count(self, a: str, b: str) -> int:
        return self.counts.get(_key(a, b), 0)

    def neighbors(self, a: str) -> set[str]:
        return self.adjacency.get(a, set())

    def n_entries(self) -> int:
        """Number of ordered (i, j) adjacency entries that are set."""
        return sum(len(v) for v in self.adjacency.values())

    def to_json(self) -> list[list]:
        return [[a, b, c] for (a, b), c in sorted(self.counts.items())]

    @classmethod
    def from_json(cls, rows: Iterable[Sequence]) -> "MatchHistory":
        h = cls()
        for a, b, c in rows:
            if a == b or int(c) < 1:
                raise ValidationError(f"invalid history entry {[a, b, c]!r}")
            h.adjacency.setdefault(a, set()).add(b)
            h.adjacency.setdefault(b, set()).add(a)
            h.counts[_key(a, b)] = int(c)
        return h

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatchHistory):
            return NotImplemented
        return self.counts == other.counts


def record_round(history: MatchHistory, schedule: RoundSchedule) -> MatchHistory:
    """Mark every scheduled pair as played; mutates and returns ``history``."""
    for a, b in schedule.pairs:
        if a == b:
            raise ValidationError(f"cannot record self-pairing {a!r}")
        history.adjacency.setdefault(a, set()).add(b)
        history.adjacency.setdefault(b, set()).add(a)
        k = _key(a, b)
        history.counts[k] = history.counts.get(k, 0) + 1
    return history


def _check_unique(ids: Sequence[str]) -> None:
    if len(set(ids)) != len(ids):
        raise ValidationError("instance ids must be unique")


def round_rng(seed: int, round_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), _SCHEDULE_STREAM, int(round_index)]))


def schedule_random(ids: Sequence[str], rng: np.random.Generator, round_index: int = 0) -> RoundSchedule:
    """Pair ids by drawing two at a time without replacement.

    Drawing pairs sequentially without replacement is the same as shuffling
    once and reading the shuffle off two at a time, which is what we do.
    The id left over in an odd pool gets the bye.
    """
    ids = list(ids)
    _check_unique(ids)
    order = [ids[i] for i in rng.permutation(len(ids))]
    pairs = [(order[i], order[i + 1]) for i in range(0, len(order) - 1, 2)]
    bye = order[-1] if len(order) % 2 else None
    return RoundSchedule(round_index, pairs, bye)


def bfs_distances(source: str, history: MatchHistory, pool: set[str]) -> dict[str, int]:
    """Hop counts from ``source`` to every reachable node of ``pool``.

    Paths may pass through nodes outside ``pool``; only the targets are
    restricted.
    """
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in history.neighbors(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return {k: d for k, d in dist.items() if k in pool}


def pair_distances(ids: Sequence[str], history: MatchHistory, n_total: int) -> dict[tuple[int, int], int]:
    """Shortest-path distance for every unordered pair, keyed by positions in ``ids``.

    Unreachable pairs get ``n_total``.
    """
    pool = set(ids)
    out: dict[tuple[int, int], int] = {}
    for i, a in enumerate(ids):
        reach = bfs_distances(a, history, pool)
        for j in range(i + 1, len(ids)):
            out[(i, j)] = reach.get(ids[j], n_total)
    return out


def schedule_graph(ids: Sequence[str], history: MatchHistory, n_total: int, round_index: int = 0) -> RoundSchedule:
    """Farthest-first greedy pairing on the played-matches graph.

    Each step takes the largest remaining distance ``d``. Among the pairs at
    distance ``d`` it picks the node with the fewest such partners (earliest
    in ``ids`` on ties) and pairs it with its partner that itself has the
    fewest options (again earliest on ties). Pairing the most constrained
    node first keeps the greedy from stranding two old opponents at the end
    of the pool, which plain lexicographic order does for pools of size
    4m + 2.
    """
    ids = list(ids)
    _check_unique(ids)
    if n_total < 1:
        raise ValidationError("n_total must be positive")
    n = len(ids)
    dist = np.zeros((n, n), dtype=np.int64)
    for (i, j), d in pair_distances(ids, history, n_total).items():
        dist[i, j] = dist[j, i] = d
    np.fill_diagonal(dist, -1)

    alive = np.ones(n, dtype=bool)
    pairs: list[tuple[str, str]] = []
    while alive.sum() >= 2:
        live = np.flatnonzero(alive)
        sub = dist[np.ix_(live, live)]
        top = sub.max()
        at_top = sub == top
        degree = at_top.sum(axis=1)
        # nodes with no partner at this distance are not candidates; argmin
        # returns the first minimum, i.e. the earliest id in dataset order
        u = int(np.argmin(np.where(degree > 0, degree, n + 1)))
        partners = np.flatnonzero(at_top[u])
        v = int(partners[np.argmin(degree[partners])])
        a, b = int(live[min(u, v)]), int(live[max(u, v)])
        pairs.append((ids[a], ids[b]))
        alive[a] = alive[b] = False
    left = np.flatnonzero(alive)
    bye = ids[int(left[0])] if len(left) else None
    return RoundSchedule(round_index, pairs, bye)


def swiss_order(ratings: Sequence[Rating]) -> list[str]:
    """Ids sorted by rating, best first; equal ratings keep input order."""
    order = sorted(range(len(ratings)), key=lambda i: (-ratings[i].elo, i))
    return [ratings[i].instance_id for i in order]


def schedule_swiss(ratings: Sequence[Rating], round_index: int = 0, group_size: int = SWISS_GROUP_SIZE) -> RoundSchedule:
    """Rank-grouped pairing: inside each block of ``group_size`` ranks, i meets g-1-i.

    A trailing short block uses the same mirrored rule on its own length;
    if that length is odd its middle entry sits out.
    """
    _check_unique([r.instance_id for r in ratings])
    ranked = swiss_order(ratings)
    pairs: list[tuple[str, str]] = []
    bye = None
    for start in range(0, len(ranked), group_size):
        group = ranked[start:start + group_size]
        g = len(group)
        for i in range(g // 2):
            pairs.append((group[i], group[g - 1 - i]))
        if g % 2:
            bye = group[g // 2]
    return RoundSchedule(round_index, pairs, bye)


def repeat_fraction(schedules: Sequence[RoundSchedule]) -> float:
    """Fraction of all scheduled matches whose pair had already met earlier."""
    seen: set[tuple[str, str]] = set()
    total = repeats = 0
    for s in schedules:
        for a, b in s.pairs:
            k = _key(a, b)
            total += 1
            if k in seen:
                repeats += 1
            seen.add(k)
    return repeats / total if total else 0.0
