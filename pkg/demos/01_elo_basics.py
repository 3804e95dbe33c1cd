"""
Elo updates and rating-derived scores
=====================================

A single decisive game moves both players by the same amount in opposite
directions. The size of the move depends on how surprising the result was.
"""

# %%
from eloarena import expected_score, rating_to_score, update_pair

# Equal players: the winner gains K/2.
print(update_pair(1000, 1000, a_won=True, k=32))

# %%
# A 400 point favourite is expected to win 10 games in 11.
print(expected_score(1400, 1000), 10 / 11)

# An upset costs the favourite most of K.
print(update_pair(1400, 1000, a_won=False, k=32))

# %%
# Ratings map to scores in (0, 1): the chance of beating an average
# (1000-rated) instance. The map is monotone, so rankings are unchanged.
for elo in (850, 1000, 1150, 1400):
    print(elo, round(rating_to_score(elo), 4))
