import itertools
from collections import Counter

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from eloarena.rating import Rating
from eloarena.scheduling import (
    MatchHistory,
    RoundSchedule,
    pair_distances,
    record_round,
    repeat_fraction,
    round_rng,
    schedule_graph,
    schedule_random,
    schedule_swiss,
)


def ids_of(n):
    return [f"i{k:03d}" for k in range(n)]


def assert_partition(s: RoundSchedule, ids):
    s.validate(ids)
    flat = s.ids()
    assert sorted(flat) == sorted(ids)


# -- random -----------------------------------------------------------------

def test_random_two_ids():
    s = schedule_random(["a", "b"], np.random.default_rng(123))
    assert [set(p) for p in s.pairs] == [{"a", "b"}]
    assert s.bye is None


def test_random_three_ids_deterministic():
    s1 = schedule_random(["a", "b", "c"], round_rng(5, 0))
    s2 = schedule_random(["a", "b", "c"], round_rng(5, 0))
    assert s1 == s2
    assert len(s1.pairs) == 1 and s1.bye is not None


@pytest.mark.parametrize("n", [0, 1])
def test_random_degenerate(n):
    s = schedule_random(ids_of(n), np.random.default_rng(0))
    assert s.pairs == []
    assert s.bye == (ids_of(1)[0] if n == 1 else None)


def test_random_pair_frequencies_uniform():
    ids = ids_of(64)
    counts = Counter()
    for seed in range(1000):
        s = schedule_random(ids, round_rng(seed, 0))
        assert_partition(s, ids)
        counts.update(frozenset(p) for p in s.pairs)
    all_pairs = [frozenset(p) for p in itertools.combinations(ids, 2)]
    observed = np.array([counts[p] for p in all_pairs])
    assert observed.sum() == 1000 * 32
    p = stats.chisquare(observed).pvalue
    assert p > 1e-3


# -- history ----------------------------------------------------------------

def test_record_round_basic():
    h = record_round(MatchHistory(), RoundSchedule(0, [("a", "b")]))
    assert h.played("a", "b") and h.played("b", "a")
    assert not h.played("a", "a")
    record_round(h, RoundSchedule(1, [("b", "a")]))
    assert h.count("a", "b") == 2
    assert h.played("a", "b")


def test_record_round_entry_count():
    ids = ids_of(10)
    pairs = [(ids[i], ids[i + 1]) for i in range(0, 10, 2)]
    h = record_round(MatchHistory(), RoundSchedule(0, pairs))
    assert h.n_entries() == 2 * len(pairs)


def test_history_json_roundtrip():
    h = record_round(MatchHistory(), RoundSchedule(0, [("a", "b"), ("c", "d")]))
    record_round(h, RoundSchedule(1, [("a", "b")]))
    assert MatchHistory.from_json(h.to_json()) == h


# -- graph ------------------------------------------------------------------

def test_graph_round_one_lexicographic():
    s = schedule_graph(["id0", "id1", "id2", "id3"], MatchHistory(), 4)
    assert s.pairs == [("id0", "id1"), ("id2", "id3")]
    assert s.bye is None


def test_graph_path_history():
    h = record_round(MatchHistory(), RoundSchedule(0, [("a", "b"), ("b", "c")]))
    d = pair_distances(["a", "b", "c", "d"], h, 4)
    assert d[(0, 3)] == d[(1, 3)] == d[(2, 3)] == 4
    assert d[(0, 1)] == 1 and d[(0, 2)] == 2
    s = schedule_graph(["a", "b", "c", "d"], h, 4)
    assert s.pairs == [("a", "d"), ("b", "c")]


def random_history(ids, rounds, seed):
    h = MatchHistory()
    for r in range(rounds):
        record_round(h, schedule_random(ids, round_rng(seed, r), r))
    return h


@pytest.mark.parametrize("seed", range(5))
def test_bfs_matches_networkx(seed):
    ids = ids_of(30)
    h = random_history(ids[:24], 2, seed)  # leave some nodes isolated
    g = nx.Graph()
    g.add_nodes_from(ids)
    g.add_edges_from(h.counts)
    ref = dict(nx.all_pairs_shortest_path_length(g))
    got = pair_distances(ids, h, 999)
    for (i, j), d in got.items():
        assert d == ref[ids[i]].get(ids[j], 999)


@pytest.mark.parametrize("n", list(range(4, 41)) + [64, 127, 128])
def test_graph_round_two_has_no_repeats(n):
    ids = ids_of(n)
    h = MatchHistory()
    s1 = schedule_graph(ids, h, n, 0)
    record_round(h, s1)
    s2 = schedule_graph(ids, h, n, 1)
    assert_partition(s2, ids)
    assert not any(h.played(a, b) for a, b in s2.pairs)


def test_graph_prefers_farthest():
    # in a pool of two components, cross-component pairs are at n_total
    h = record_round(MatchHistory(), RoundSchedule(0, [("a", "b"), ("c", "d")]))
    s = schedule_graph(["a", "b", "c", "d"], h, 4)
    assert all(not h.played(a, b) for a, b in s.pairs)


def test_graph_odd_pool_bye():
    ids = ids_of(5)
    s = schedule_graph(ids, MatchHistory(), 5)
    assert_partition(s, ids)
    assert s.bye == "i004"


def test_graph_allows_repeats_as_last_resort():
    h = record_round(MatchHistory(), RoundSchedule(0, [("a", "b")]))
    s = schedule_graph(["a", "b"], h, 2)
    assert s.pairs == [("a", "b")]


# -- swiss ------------------------------------------------------------------

def ranked(n, start=2000.0):
    # r0 is the highest rated; listed in scrambled order to exercise the sort
    rs = [Rating(f"r{i}", start - 10 * i) for i in range(n)]
    rng = np.random.default_rng(n)
    return [rs[i] for i in rng.permutation(n)]


def test_swiss_eight():
    s = schedule_swiss(ranked(8))
    assert s.pairs == [("r0", "r7"), ("r1", "r6"), ("r2", "r5"), ("r3", "r4")]
    assert s.bye is None


def test_swiss_sixteen():
    s = schedule_swiss(ranked(16))
    assert s.pairs == [
        ("r0", "r7"), ("r1", "r6"), ("r2", "r5"), ("r3", "r4"),
        ("r8", "r15"), ("r9", "r14"), ("r10", "r13"), ("r11", "r12"),
    ]


def test_swiss_three():
    s = schedule_swiss(ranked(3))
    assert s.pairs == [("r0", "r2")]
    assert s.bye == "r1"


def test_swiss_short_group():
    s = schedule_swiss(ranked(13))
    assert s.pairs[4:] == [("r8", "r12"), ("r9", "r11")]
    assert s.bye == "r10"


def test_swiss_equal_ratings_keep_input_order():
    rs = [Rating(x, 1000.0) for x in "abcd"]
    assert schedule_swiss(rs).pairs == [("a", "d"), ("b", "c")]


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=1, max_value=12), st.integers(min_value=0, max_value=2**32 - 1))
def test_swiss_structure_multiple_of_eight(groups, seed):
    rng = np.random.default_rng(seed)
    elos = rng.permutation(np.arange(groups * 8, dtype=float))
    rs = [Rating(f"x{i}", e) for i, e in enumerate(elos)]
    rank = {r.instance_id: int(groups * 8 - 1 - r.elo) for r in rs}
    s = schedule_swiss(rs)
    assert_partition(s, [r.instance_id for r in rs])
    for a, b in s.pairs:
        assert rank[a] // 8 == rank[b] // 8
        assert (rank[a] + rank[b]) % 8 == 7


# -- shared properties --------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=40), st.integers(min_value=0, max_value=1000), st.integers(0, 3))
def test_partition_and_determinism_all_schedulers(n, seed, history_rounds):
    ids = ids_of(n)
    h = random_history(ids, history_rounds, seed)
    rs = [Rating(i, float(e)) for i, e in zip(ids, np.random.default_rng(seed).permutation(n))]
    for make in (
        lambda: schedule_random(ids, round_rng(seed, 3)),
        lambda: schedule_graph(ids, h, max(n, 1)),
        lambda: schedule_swiss(rs),
    ):
        s = make()
        assert_partition(s, ids)
        assert make() == s


def test_repeat_fraction_graph_not_worse_than_random():
    ids = ids_of(64)
    graph_fracs, random_fracs = [], []
    for seed in range(10):
        h, sched = MatchHistory(), []
        for r in range(10):
            s = schedule_graph(ids, h, 64, r)
            record_round(h, s)
            sched.append(s)
        graph_fracs.append(repeat_fraction(sched))
        random_fracs.append(repeat_fraction([schedule_random(ids, round_rng(seed, r), r) for r in range(10)]))
    assert np.median(graph_fracs) <= np.median(random_fracs)
