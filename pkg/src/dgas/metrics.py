"""Confusion-matrix metrics, micro/macro averaging, and ROC analysis.

Conventions: a metric whose denominator is zero is defined as 0, which
keeps macro averages stable when rare classes are never predicted. ROC
curves sweep every distinct score once (ties grouped), carry explicit
(0, 0) and (1, 1) endpoints, and integrate by trapezoid, which makes the
area identical to the pairwise ranking statistic with half credit for
ties.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square count matrix indexed (actual class, predicted class)."""

    labels: tuple[str, ...]
    counts: np.ndarray

    @classmethod
    def from_pairs(
        cls, pairs: Sequence[tuple[str, str]], labels: Sequence[str]
    ) -> "ConfusionMatrix":
        labels = tuple(labels)
        index = {label: i for i, label in enumerate(labels)}
        counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
        for actual, predicted in pairs:
            if actual not in index:
                raise InvalidInputError(f"unknown actual label {actual!r}")
            if predicted not in index:
                raise InvalidInputError(f"unknown predicted label {predicted!r}")
            counts[index[actual], index[predicted]] += 1
        return cls(labels, counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidInputError(f"unknown class {label!r}") from None

    def true_positives(self, label: str) -> int:
        i = self.index(label)
        return int(self.counts[i, i])

    def false_positives(self, label: str) -> int:
        i = self.index(label)
        return int(self.counts[:, i].sum() - self.counts[i, i])

    def false_negatives(self, label: str) -> int:
        i = self.index(label)
        return int(self.counts[i, :].sum() - self.counts[i, i])

    def binary_counts(self, positive: str) -> tuple[int, int, int, int]:
        """(TP, FP, FN, TN) with ``positive`` as the positive class."""
        tp = self.true_positives(positive)
        fp = self.false_positives(positive)
        fn = self.false_negatives(positive)
        tn = self.total - tp - fp - fn
        return tp, fp, fn, tn

    def add(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.labels != self.labels:
            raise InvalidInputError("cannot sum confusion matrices over different classes")
        return ConfusionMatrix(self.labels, self.counts + other.counts)


def accuracy(cm: ConfusionMatrix) -> float:
    return float(np.trace(cm.counts) / cm.total) if cm.total else 0.0


def _safe_ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def precision(cm: ConfusionMatrix, label: str) -> float:
    tp = cm.true_positives(label)
    return _safe_ratio(tp, tp + cm.false_positives(label))


def recall(cm: ConfusionMatrix, label: str) -> float:
    tp = cm.true_positives(label)
    return _safe_ratio(tp, tp + cm.false_negatives(label))


def f1(cm: ConfusionMatrix, label: str) -> float:
    p, r = precision(cm, label), recall(cm, label)
    return _safe_ratio(2.0 * p * r, p + r)


def f1_from_scores(p: float, r: float) -> float:
    """Harmonic mean of a precision/recall pair."""
    return _safe_ratio(2.0 * p * r, p + r)


@dataclass(frozen=True)
class MicroMacro:
    micro_precision: float
    micro_recall: float
    micro_f1: float
    macro_precision: float
    macro_recall: float
    macro_f1: float


def micro_macro(cm: ConfusionMatrix) -> MicroMacro:
    """Micro scores from summed TP/FP/FN; macro scores as unweighted means.

    Every declared class contributes to the macro mean, including classes
    that never occur (their scores are 0 by the zero-denominator rule).
    """
    tps = np.array([cm.true_positives(label) for label in cm.labels], dtype=float)
    fps = np.array([cm.false_positives(label) for label in cm.labels], dtype=float)
    fns = np.array([cm.false_negatives(label) for label in cm.labels], dtype=float)
    micro_p = _safe_ratio(tps.sum(), tps.sum() + fps.sum())
    micro_r = _safe_ratio(tps.sum(), tps.sum() + fns.sum())
    per_p = [precision(cm, label) for label in cm.labels]
    per_r = [recall(cm, label) for label in cm.labels]
    per_f = [f1(cm, label) for label in cm.labels]
    return MicroMacro(
        micro_precision=micro_p,
        micro_recall=micro_r,
        micro_f1=f1_from_scores(micro_p, micro_r),
        macro_precision=float(np.mean(per_p)),
        macro_recall=float(np.mean(per_r)),
        macro_f1=float(np.mean(per_f)),
    )


@dataclass(frozen=True)
class RocCurve:
    """Detection operating points: (threshold, FPR, TPR) plus the area."""

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    def __len__(self) -> int:
        return len(self.thresholds)


def roc(scored: Sequence[tuple[int, float]]) -> RocCurve:
    """ROC curve from (label, score) pairs; label 1 marks the positive class.

    Thresholds mean "predict positive when score >= threshold". The sweep
    starts above every score (the (0, 0) corner) and ends at the minimum
    score, where everything is positive (the (1, 1) corner).
    """
    labels = np.array([int(lab) for lab, _ in scored])
    scores = np.array([float(s) for _, s in scored])
    pos = int((labels == 1).sum())
    neg = len(labels) - pos
    if pos == 0 or neg == 0:
        raise InvalidInputError("ROC needs both positive and negative examples")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    cum_pos = np.cumsum(sorted_labels)
    cum_neg = np.cumsum(1 - sorted_labels)
    # Last index of each run of tied scores.
    distinct_end = np.nonzero(np.diff(sorted_scores, append=np.nan))[0]

    thresholds = np.concatenate([[np.inf], sorted_scores[distinct_end]])
    tpr = np.concatenate([[0.0], cum_pos[distinct_end] / pos])
    fpr = np.concatenate([[0.0], cum_neg[distinct_end] / neg])
    area = float(np.trapezoid(tpr, fpr))
    return RocCurve(thresholds=thresholds, fpr=fpr, tpr=tpr, auc=area)


def tpr_at_fpr(curve: RocCurve, fpr_target: float) -> float:
    """Best TPR whose FPR does not exceed the target (no interpolation).

    Targets below the smallest achievable false-positive rate fall back to
    the zero-FPR operating point.
    """
    target = max(fpr_target, 0.0)
    eligible = curve.fpr <= target
    return float(curve.tpr[eligible].max())


def roc_to_csv(curve: RocCurve) -> str:
    lines = ["threshold,fpr,tpr"]
    for t, x, y in zip(curve.thresholds, curve.fpr, curve.tpr):
        lines.append(f"{'inf' if np.isinf(t) else repr(float(t))},{float(x)!r},{float(y)!r}")
    return "\n".join(lines) + "\n"
