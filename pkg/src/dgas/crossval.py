"""Stratified cross-validation, paired significance testing, and the
fold-train/fold-evaluate experiment harness.

Folds are stratified on the family label rather than the binary label, so
rare malware families spread as evenly as possible and per-family result
tables stay meaningful. The paired t-test computes its two-sided p-value
through the regularized incomplete beta function, evaluated with a
continued fraction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .data.examples import BENIGN_FAMILY, LABEL_MALWARE, DomainExample
from .errors import ConfigurationError, DegenerateInputError, InvalidInputError
from .metrics import (
    ConfusionMatrix,
    MicroMacro,
    RocCurve,
    accuracy,
    f1,
    micro_macro,
    precision,
    recall,
    roc,
    tpr_at_fpr,
)

FPR_TARGETS = (1e-3, 1e-2, 1e-1)


def stratified_kfold(
    dataset: Sequence[DomainExample], k: int, seed: int
) -> list[list[int]]:
    """Partition example indices into k folds, stratified by family.

    Within every family the fold sizes differ by at most one; families
    with fewer than k members simply appear in fewer folds. The rotation
    offset is drawn per family so small folds do not pile up at index 0.
    """
    if k < 2:
        raise ConfigurationError("k must be at least 2")
    if k > len(dataset):
        raise ConfigurationError(f"k={k} exceeds the dataset size {len(dataset)}")
    rng = np.random.default_rng(seed)
    by_family: dict[str, list[int]] = {}
    for i, ex in enumerate(dataset):
        by_family.setdefault(ex.family, []).append(i)
    folds: list[list[int]] = [[] for _ in range(k)]
    for family in sorted(by_family):
        indices = np.array(by_family[family])
        rng.shuffle(indices)
        offset = int(rng.integers(k))
        for j, chunk in enumerate(np.array_split(indices, k)):
            folds[(j + offset) % k].extend(chunk.tolist())
    return [sorted(fold) for fold in folds]


def _lbeta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _betacf(a: float, b: float, x: float, tol: float = 1e-12, max_iter: int = 500) -> float:
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function."""
    if not 0.0 <= x <= 1.0:
        raise InvalidInputError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    front = math.exp(a * math.log(x) + b * math.log(1.0 - x) - _lbeta(a, b))
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


@dataclass(frozen=True)
class TTestResult:
    statistic: float
    p_value: float
    dof: int


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-sided paired t-test on per-fold scores."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InvalidInputError("paired scores must have equal length")
    n = len(a)
    if n < 2:
        raise InvalidInputError("need at least two pairs")
    diff = a - b
    sd = float(diff.std(ddof=1))
    if sd == 0.0:
        raise DegenerateInputError("differences have zero variance")
    t = float(diff.mean() / (sd / math.sqrt(n)))
    dof = n - 1
    p = regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t))
    return TTestResult(statistic=t, p_value=p, dof=dof)


class FoldClassifier(Protocol):
    """What the experiment harness needs from a trained model."""

    def detection_scores(self, names: Sequence[str]) -> np.ndarray: ...

    def predicted_families(self, names: Sequence[str]) -> list[str] | None: ...


ModelFactory = Callable[[list[DomainExample], int], FoldClassifier]


@dataclass
class DetectionMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float | None  # None when a fold holds a single class
    tpr_at_fpr: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "auc": self.auc,
            "tpr_at_fpr": dict(self.tpr_at_fpr),
        }


@dataclass
class CrossValReport:
    """Per-fold and pooled results of one k-fold experiment."""

    k: int
    seed: int
    threshold: float
    folds: list[DetectionMetrics]
    pooled: DetectionMetrics
    pooled_counts: dict[str, int]
    pooled_roc: RocCurve | None
    per_family: dict[str, dict]
    classification: dict | None = None
    mean_of_folds: dict[str, float] = field(default_factory=dict)

    @property
    def fold_f1(self) -> list[float]:
        return [fold.f1 for fold in self.folds]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "seed": self.seed,
            "threshold": self.threshold,
            "folds": [fold.to_dict() for fold in self.folds],
            "pooled": self.pooled.to_dict(),
            "pooled_counts": dict(self.pooled_counts),
            "mean_of_folds": dict(self.mean_of_folds),
            "per_family": {name: dict(v) for name, v in sorted(self.per_family.items())},
            "classification": self.classification,
        }


def _detection_metrics(
    labels: np.ndarray, scores: np.ndarray, threshold: float
) -> tuple[DetectionMetrics, ConfusionMatrix, RocCurve | None]:
    predicted = np.where(scores >= threshold, LABEL_MALWARE, "benign")
    actual = np.where(labels == 1, LABEL_MALWARE, "benign")
    cm = ConfusionMatrix.from_pairs(list(zip(actual, predicted)), ("malware", "benign"))
    curve = None
    if 0 < labels.sum() < len(labels):  # ROC needs both classes in the fold
        curve = roc(list(zip(labels.tolist(), scores.tolist())))
    metrics = DetectionMetrics(
        accuracy=accuracy(cm),
        precision=precision(cm, LABEL_MALWARE),
        recall=recall(cm, LABEL_MALWARE),
        f1=f1(cm, LABEL_MALWARE),
        auc=curve.auc if curve else None,
        tpr_at_fpr={repr(t): tpr_at_fpr(curve, t) for t in FPR_TARGETS} if curve else {},
    )
    return metrics, cm, curve


def run_experiment(
    dataset: Sequence[DomainExample],
    model_factory: ModelFactory,
    k: int,
    seed: int,
    threshold: float = 0.5,
) -> CrossValReport:
    """k-fold cross-validation: train on k-1 folds, score the held-out fold.

    Reports per-fold detection metrics, pooled metrics over the summed
    confusion matrix and pooled scores, per-family detection recall, and
    (when the model predicts families) per-family classification scores.
    """
    dataset = list(dataset)
    folds = stratified_kfold(dataset, k, seed)

    all_labels: list[int] = []
    all_scores: list[float] = []
    all_families: list[str] = []
    all_predicted_families: list[str] = []
    fold_metrics: list[DetectionMetrics] = []
    pooled_cm: ConfusionMatrix | None = None
    classifies = True

    for fold_index, holdout in enumerate(folds):
        holdout_set = set(holdout)
        train_examples = [ex for i, ex in enumerate(dataset) if i not in holdout_set]
        fold_seed = seed * 1_000_003 + fold_index
        model = model_factory(train_examples, fold_seed)

        test_examples = [dataset[i] for i in holdout]
        names = [ex.name for ex in test_examples]
        labels = np.array([1 if ex.label == LABEL_MALWARE else 0 for ex in test_examples])
        scores = np.asarray(model.detection_scores(names), dtype=float)
        metrics, cm, _ = _detection_metrics(labels, scores, threshold)
        fold_metrics.append(metrics)
        pooled_cm = cm if pooled_cm is None else pooled_cm.add(cm)

        all_labels.extend(labels.tolist())
        all_scores.extend(scores.tolist())
        all_families.extend(ex.family for ex in test_examples)
        predicted = model.predicted_families(names)
        if predicted is None:
            classifies = False
        else:
            all_predicted_families.extend(predicted)

    labels_arr = np.array(all_labels)
    scores_arr = np.array(all_scores)
    pooled, _, pooled_curve = _detection_metrics(labels_arr, scores_arr, threshold)
    tp, fp, fn, tn = pooled_cm.binary_counts(LABEL_MALWARE)

    per_family: dict[str, dict] = {}
    verdicts = scores_arr >= threshold
    for family in sorted(set(all_families)):
        mask = np.array([fam == family for fam in all_families])
        if family == BENIGN_FAMILY:
            correct = ~verdicts[mask]
        else:
            correct = verdicts[mask]
        per_family[family] = {
            "count": int(mask.sum()),
            "detection_recall": float(correct.mean()),
        }

    classification = None
    if classifies:
        class_labels = tuple(sorted(set(all_families) | set(all_predicted_families)))
        class_cm = ConfusionMatrix.from_pairs(
            list(zip(all_families, all_predicted_families)), class_labels
        )
        aggregates: MicroMacro = micro_macro(class_cm)
        for family in class_labels:
            entry = per_family.setdefault(family, {"count": 0, "detection_recall": 0.0})
            entry["classification"] = {
                "precision": precision(class_cm, family),
                "recall": recall(class_cm, family),
                "f1": f1(class_cm, family),
            }
        classification = {
            "accuracy": accuracy(class_cm),
            "micro": {
                "precision": aggregates.micro_precision,
                "recall": aggregates.micro_recall,
                "f1": aggregates.micro_f1,
            },
            "macro": {
                "precision": aggregates.macro_precision,
                "recall": aggregates.macro_recall,
                "f1": aggregates.macro_f1,
            },
        }

    fold_aucs = [m.auc for m in fold_metrics if m.auc is not None]
    mean_of_folds = {
        "accuracy": float(np.mean([m.accuracy for m in fold_metrics])),
        "precision": float(np.mean([m.precision for m in fold_metrics])),
        "recall": float(np.mean([m.recall for m in fold_metrics])),
        "f1": float(np.mean([m.f1 for m in fold_metrics])),
        "auc": float(np.mean(fold_aucs)) if fold_aucs else None,
    }

    return CrossValReport(
        k=k,
        seed=seed,
        threshold=threshold,
        folds=fold_metrics,
        pooled=pooled,
        pooled_counts={"tp": tp, "fp": fp, "fn": fn, "tn": tn},
        pooled_roc=pooled_curve,
        per_family=per_family,
        classification=classification,
        mean_of_folds=mean_of_folds,
    )
