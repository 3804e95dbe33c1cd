"""
From ratings to a decision threshold
====================================

Run a short tournament, convert ratings to scores, and read the ROC/PR
curves and the F1-optimal cutoff.
"""

# %%
from eloarena import EloConfig, JudgeKind, JudgeSpec, TournamentConfig, curve_report, run_tournament, synthetic_dataset
from eloarena.tournament import scored_instances

instances, hidden = synthetic_dataset(100, seed=4, positive_fraction=0.3)
cfg = TournamentConfig("random", EloConfig(seed=4), JudgeSpec(JudgeKind.NOISY_BT, hidden=hidden, seed=4), 15)
state = run_tournament(instances, cfg)

report = curve_report(scored_instances(state))
print(f"AUROC {report.auroc:.3f}  AUPRC {report.auprc:.3f}")
print(f"best cutoff {report.best_threshold:.3f}: F1 {report.best_f1:.3f}, "
      f"precision {report.best_precision:.3f}, recall {report.best_recall:.3f}, accuracy {report.best_accuracy:.3f}")

# %%
# A screening deployment wants recall; pick the highest cutoff with recall >= 0.95.
import numpy as np

scores = np.array([s.score for s in scored_instances(state)])
gold = np.array([s.gold for s in scored_instances(state)])
for t in np.sort(np.unique(scores))[::-1]:
    pred = scores >= t
    if (pred & (gold == 1)).sum() / gold.sum() >= 0.95:
        print(f"cutoff {t:.3f}: recall {(pred & (gold == 1)).sum() / gold.sum():.2f}, "
              f"precision {(pred & (gold == 1)).sum() / pred.sum():.2f}")
        break
