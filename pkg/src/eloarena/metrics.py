"""Threshold-free and threshold-optimal metrics for scored binary data.

Scores are compared as given; tied scores always move across a threshold
together, so curves contain one point per distinct score.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CurveUndefinedError, ValidationError


@dataclass(frozen=True)
class ScoredInstance:
    instance_id: str
    score: float
    gold: int


def _arrays(scored_or_scores, labels=None) -> tuple[np.ndarray, np.ndarray]:
    if labels is None:
        scores = np.array([s.score for s in scored_or_scores], dtype=float)
        labels = np.array([s.gold for s in scored_or_scores], dtype=int)
    else:
        scores = np.asarray(scored_or_scores, dtype=float)
        labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValidationError(f"scores and labels must be equal-length vectors, got {scores.shape} and {labels.shape}")
    if not np.all(np.isfinite(scores)):
        raise ValidationError("scores must be finite")
    if not np.all((labels == 0) | (labels == 1)):
        raise ValidationError("labels must be 0 or 1")
    return scores, labels


def _cumulative_counts(scores: np.ndarray, labels: np.ndarray):
    """True/false positive counts when predicting positive at or above each distinct score, best first."""
    order = np.argsort(-scores, kind="mergesort")
    s, y = scores[order], labels[order]
    last_of_tie = np.r_[np.flatnonzero(np.diff(s)), len(s) - 1]
    tps = np.cumsum(y)[last_of_tie]
    fps = (last_of_tie + 1) - tps
    return s[last_of_tie], tps, fps


def _require_both(labels: np.ndarray) -> None:
    if labels.sum() == 0 or labels.sum() == len(labels):
        raise CurveUndefinedError("ROC needs at least one positive and one negative label")


def roc_curve(scored, labels=None) -> list[tuple[float, float]]:
    """ROC points (fpr, tpr) from (0, 0) to (1, 1).

    Accepts either a sequence of :class:`ScoredInstance` or parallel
    ``scores, labels`` arrays.
    """
    scores, y = _arrays(scored, labels)
    _require_both(y)
    _, tps, fps = _cumulative_counts(scores, y)
    tpr = np.r_[0, tps] / y.sum()
    fpr = np.r_[0, fps] / (len(y) - y.sum())
    return [(float(f), float(t)) for f, t in zip(fpr, tpr)]


def auroc(scored, labels=None) -> float:
    pts = np.array(roc_curve(scored, labels))
    return float(np.trapezoid(pts[:, 1], pts[:, 0]))


def pr_curve_and_auprc(scored, labels=None) -> tuple[list[tuple[float, float]], float]:
    """(recall, precision) per distinct threshold, plus step-wise area over recall."""
    scores, y = _arrays(scored, labels)
    if y.sum() == 0:
        raise CurveUndefinedError("precision-recall curve needs at least one positive label")
    _, tps, fps = _cumulative_counts(scores, y)
    recall = tps / y.sum()
    precision = tps / (tps + fps)
    area = float(np.sum(np.diff(np.r_[0.0, recall]) * precision))
    return [(float(r), float(p)) for r, p in zip(recall, precision)], area


def candidate_thresholds(scores: np.ndarray) -> np.ndarray:
    """Midpoints between consecutive distinct scores, with one sentinel beyond each end."""
    u = np.unique(scores)
    return np.r_[u[0] - 1.0, (u[:-1] + u[1:]) / 2.0, u[-1] + 1.0]


def f1_from_counts(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    f1: float
    precision: float
    recall: float
    accuracy: float


def best_f1_threshold(scored, labels=None) -> ThresholdResult:
    """Threshold maximizing positive-class F1, predicting positive when score > threshold.

    Ties in F1 go to the candidate with higher recall, then the lower threshold.
    """
    scores, y = _arrays(scored, labels)
    _require_both(y)
    cands = candidate_thresholds(scores)
    pred = scores[None, :] > cands[:, None]
    tp = (pred & (y == 1)).sum(axis=1)
    fp = (pred & (y == 0)).sum(axis=1)
    fn = y.sum() - tp
    tn = len(y) - tp - fp - fn
    f1 = np.array([f1_from_counts(int(a), int(b), int(c)) for a, b, c in zip(tp, fp, fn)])
    recall = tp / y.sum()
    # lexsort keys run last-to-first: maximize f1, then recall, then prefer lower threshold
    best = np.lexsort((np.arange(len(cands)), -recall, -f1))[0]
    prec = tp[best] / (tp[best] + fp[best]) if tp[best] + fp[best] else 0.0
    return ThresholdResult(
        float(cands[best]), float(f1[best]), float(prec), float(recall[best]),
        float((tp[best] + tn[best]) / len(y)),
    )


@dataclass
class ClassificationReport:
    precision: float
    recall: float
    f1: float
    accuracy: float
    tp: int
    fp: int
    fn: int
    tn: int
    n_failed: int = 0
    precision_undefined: bool = False
    recall_undefined: bool = False

    def as_tuple(self) -> tuple[float, float, float, float]:
        return self.precision, self.recall, self.f1, self.accuracy

    def to_json(self) -> dict:
        return asdict(self)


def classification_report(predictions: Sequence[int | bool | None], gold: Sequence[int]) -> ClassificationReport:
    """Confusion-matrix metrics for the positive class.

    ``None`` predictions (no answer extracted) count as negative and are
    tallied in ``n_failed``. Zero denominators give 0 and set a flag.
    """
    if len(predictions) != len(gold):
        raise ValidationError(f"length mismatch: {len(predictions)} predictions vs {len(gold)} labels")
    if not gold:
        raise ValidationError("classification_report needs at least one instance")
    n_failed = sum(p is None for p in predictions)
    p = np.array([bool(x) if x is not None else False for x in predictions])
    g = np.array([int(x) for x in gold]) == 1
    tp = int((p & g).sum())
    fp = int((p & ~g).sum())
    fn = int((~p & g).sum())
    tn = int((~p & ~g).sum())
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return ClassificationReport(
        precision, recall, f1_from_counts(tp, fp, fn), (tp + tn) / len(g),
        tp, fp, fn, tn, n_failed, tp + fp == 0, tp + fn == 0,
    )


@dataclass
class CurveReport:
    roc_points: list[tuple[float, float]]
    pr_points: list[tuple[float, float]]
    auroc: float
    auprc: float
    best_threshold: float
    best_f1: float
    best_precision: float
    best_recall: float
    best_accuracy: float
    n: int = 0
    n_positive: int = 0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        d["roc_points"] = [list(p) for p in self.roc_points]
        d["pr_points"] = [list(p) for p in self.pr_points]
        return d

    def write(self, out_dir, prefix: str = "") -> dict[str, Path]:
        out_dir = Path(out_dir)
        paths = {
            "report": out_dir / f"{prefix}report.json",
            "roc": out_dir / f"{prefix}roc.csv",
            "pr": out_dir / f"{prefix}pr.csv",
        }
        paths["report"].write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")
        write_points(paths["roc"], ("fpr", "tpr"), self.roc_points)
        write_points(paths["pr"], ("recall", "precision"), self.pr_points)
        return paths


def write_points(path, header: Sequence[str], points) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows([repr(float(a)), repr(float(b))] for a, b in points)


def curve_report(scored, labels=None) -> CurveReport:
    scores, y = _arrays(scored, labels)
    roc = roc_curve(scores, y)
    pr, auprc = pr_curve_and_auprc(scores, y)
    best = best_f1_threshold(scores, y)
    return CurveReport(
        roc, pr, auroc(scores, y), auprc, best.threshold, best.f1,
        best.precision, best.recall, best.accuracy, len(y), int(y.sum()),
    )
