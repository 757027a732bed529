"""Classification scoring: confusion matrix at a threshold, ROC curve, AUC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    """Cell naming follows the dispute-classification convention:

    tc = true conflict (true positive),   fp = false peace (false negative),
    tp = true peace (true negative),      fc = false conflict (false positive).
    """

    tc: int
    fp: int
    tp: int
    fc: int

    def __post_init__(self):
        if min(self.tc, self.fp, self.tp, self.fc) < 0:
            raise EvalError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tc + self.fp + self.tp + self.fc

    @property
    def actual_conflicts(self) -> int:
        return self.tc + self.fp

    @property
    def actual_peace(self) -> int:
        return self.tp + self.fc

    @property
    def true_positive_rate(self) -> float:
        return self.tc / self.actual_conflicts if self.actual_conflicts else float("nan")

    @property
    def true_negative_rate(self) -> float:
        return self.tp / self.actual_peace if self.actual_peace else float("nan")

    @property
    def accuracy(self) -> float:
        return (self.tc + self.tp) / self.total if self.total else float("nan")

    def as_text(self) -> str:
        return (
            f"              predicted conflict  predicted peace\n"
            f"actual conflict  {self.tc:>12d}  {self.fp:>14d}\n"
            f"actual peace     {self.fc:>12d}  {self.tp:>14d}\n"
            f"true positive rate {self.true_positive_rate:.4f}  "
            f"true negative rate {self.true_negative_rate:.4f}  "
            f"accuracy {self.accuracy:.4f}"
        )


@dataclass(frozen=True)
class RocCurve:
    points: np.ndarray   # (n, 2) rows of (false positive rate, true positive rate)
    auc: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise EvalError("ROC points must be (n, 2)")
        if not (np.allclose(pts[0], [0.0, 0.0]) and np.allclose(pts[-1], [1.0, 1.0])):
            raise EvalError("ROC curve must run from (0,0) to (1,1)")
        if np.any(np.diff(pts[:, 0]) < -1e-12) or np.any(np.diff(pts[:, 1]) < -1e-12):
            raise EvalError("ROC coordinates must be non-decreasing")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)


def _check_lengths(scores, labels):
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise EvalError(f"scores and labels must be equal-length vectors, "
                        f"got {scores.shape} and {labels.shape}")
    if labels.size and not np.all((labels == 0.0) | (labels == 1.0)):
        raise EvalError("labels must be 0 or 1")
    return scores, labels


def confusion(scores, labels, threshold: float = 0.5) -> ConfusionMatrix:
    """Counts at a threshold; ties classify as conflict (score >= threshold)."""
    scores, labels = _check_lengths(scores, labels)
    if not 0.0 <= threshold <= 1.0:
        raise EvalError(f"threshold must lie in [0, 1], got {threshold}")
    pred = scores >= threshold
    actual = labels == 1.0
    return ConfusionMatrix(
        tc=int(np.sum(pred & actual)),
        fp=int(np.sum(~pred & actual)),
        tp=int(np.sum(~pred & ~actual)),
        fc=int(np.sum(pred & ~actual)),
    )


def roc_auc(scores, labels) -> RocCurve:
    """ROC curve swept over all distinct scores; AUC by the trapezoidal rule.

    With ties grouped per distinct score, the trapezoidal area equals the
    Mann-Whitney pair statistic (ties counted one half).
    """
    scores, labels = _check_lengths(scores, labels)
    n_pos = int(np.sum(labels == 1.0))
    n_neg = int(np.sum(labels == 0.0))
    if n_pos == 0 or n_neg == 0:
        raise EvalError("AUC is undefined: labels contain a single class")

    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < len(s):
        j = i
        while j < len(s) and s[j] == s[i]:
            j += 1
        tp += int(np.sum(y[i:j] == 1.0))
        fp += int(np.sum(y[i:j] == 0.0))
        points.append((fp / n_neg, tp / n_pos))
        i = j
    pts = np.array(points)
    dx = np.diff(pts[:, 0])
    auc = float(np.sum(dx * (pts[:-1, 1] + pts[1:, 1]) / 2.0))
    return RocCurve(points=pts, auc=auc)
