"""
Three ways to pair a round
==========================

Random pairing, farthest-first on the graph of past matches, and Swiss
(rank-sorted groups of eight, i against 7 - i).
"""

# %%

from eloarena import MatchHistory, Rating, record_round, schedule_graph, schedule_random, schedule_swiss
from eloarena.scheduling import repeat_fraction, round_rng

ids = [f"x{i:02d}" for i in range(16)]

print(schedule_random(ids, round_rng(seed=0, round_index=0)).pairs)

# %%
# Swiss pairs the top of each octet with its bottom.
ratings = [Rating(i, 1000 + 10 * k) for k, i in enumerate(ids)]
print(schedule_swiss(ratings).pairs)

# %%
# The graph scheduler avoids rematches: ten rounds over 64 instances.
ids64 = [f"x{i:02d}" for i in range(64)]
history, graph_rounds = MatchHistory(), []
for r in range(10):
    s = schedule_graph(ids64, history, n_total=64, round_index=r)
    record_round(history, s)
    graph_rounds.append(s)
random_rounds = [schedule_random(ids64, round_rng(0, r), r) for r in range(10)]
print("repeat fraction, graph :", repeat_fraction(graph_rounds))
print("repeat fraction, random:", round(repeat_fraction(random_rounds), 4))
