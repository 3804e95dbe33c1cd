"""
A tournament with a simulated judge
===================================

Instances get hidden qualities; a Bradley-Terry judge prefers the better
one with logistic probability. Labels are "top half positive". AUROC of
the Elo ratings is tracked after every round.
"""

# %%
from eloarena import EloConfig, JudgeKind, JudgeSpec, TournamentConfig, run_tournament, synthetic_dataset

instances, hidden = synthetic_dataset(128, seed=0)

curves = {}
for scheduler in ("random", "graph", "swiss"):
    cfg = TournamentConfig(
        scheduler=scheduler,
        elo=EloConfig(seed=0),
        judge=JudgeSpec(JudgeKind.NOISY_BT, hidden=hidden, seed=0),
        rounds_target=20,
    )
    state = run_tournament(instances, cfg)
    curves[scheduler] = [a for _, a, _ in state.per_round_metrics]

# %%
print("round  " + "  ".join(f"{k:>6}" for k in curves))
for r in range(20):
    print(f"{r:5d}  " + "  ".join(f"{curves[k][r]:6.3f}" for k in curves))

# %%
# With a noiseless judge the ranking becomes almost perfect.
cfg = TournamentConfig("graph", EloConfig(seed=0), JudgeSpec(JudgeKind.ORACLE, hidden=hidden), rounds_target=20)
print("oracle judge, final AUROC:", run_tournament(instances, cfg).per_round_metrics[-1][1])
