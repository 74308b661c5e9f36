"""Bigram-count logistic regression: the character-statistics baseline.

Features are occurrence counts of consecutive character pairs in the
(case-folded) domain name, dots included. The feature space is built from
training data only; bigrams never seen in training are silently dropped at
prediction time.

Training is plain seeded SGD on L2-regularized log-loss. The weight-decay
factor is tracked as a global scale so each step stays O(non-zero
features) while remaining exactly equivalent to decaying every weight.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .data.examples import LABEL_MALWARE, DomainExample
from .errors import ConfigurationError, InvalidInputError

KIND_BINARY = "binary"
KIND_MULTINOMIAL = "multinomial"


@dataclass(frozen=True)
class BigramFeatureSpace:
    """Mapping from observed character bigrams to feature columns."""

    bigram_index: dict[str, int]

    @property
    def dimension(self) -> int:
        return len(self.bigram_index)

    @classmethod
    def build(cls, names: Iterable[str]) -> "BigramFeatureSpace":
        bigrams: set[str] = set()
        for name in names:
            folded = name.strip().lower()
            bigrams.update(folded[i : i + 2] for i in range(len(folded) - 1))
        return cls({bg: i for i, bg in enumerate(sorted(bigrams))})


def extract_bigrams(name: str, space: BigramFeatureSpace) -> dict[int, int]:
    """Sparse count vector: feature column -> occurrences in the name.

    Names shorter than two characters yield the empty vector; bigrams
    outside the space are dropped.
    """
    folded = name.strip().lower()
    counts: dict[int, int] = {}
    index = space.bigram_index
    for i in range(len(folded) - 1):
        col = index.get(folded[i : i + 2])
        if col is not None:
            counts[col] = counts.get(col, 0) + 1
    return counts


@dataclass(frozen=True)
class BaselineHyper:
    epochs: int = 10
    learning_rate: float = 0.1
    l2: float = 1e-4
    seed: int = 0


@dataclass
class LogisticModel:
    """Trained logistic regression over a bigram feature space."""

    kind: str
    feature_space: BigramFeatureSpace
    weights: np.ndarray          # (D,) binary, (C, D) multinomial
    bias: np.ndarray             # (1,) binary, (C,) multinomial
    classes: tuple[str, ...] = ()  # multinomial class names

    def __post_init__(self) -> None:
        d = self.feature_space.dimension
        if self.kind == KIND_BINARY:
            if self.weights.shape != (d,) or self.bias.shape != (1,):
                raise ConfigurationError("binary model weight shapes do not match the feature space")
        elif self.kind == KIND_MULTINOMIAL:
            c = len(self.classes)
            if c < 2:
                raise ConfigurationError("multinomial model needs at least two classes")
            if self.weights.shape != (c, d) or self.bias.shape != (c,):
                raise ConfigurationError("multinomial weight shapes do not match classes/features")
        else:
            raise ConfigurationError(f"unknown model kind {self.kind!r}")


@dataclass(frozen=True)
class BaselinePrediction:
    name: str
    detect_prob: float | None = None
    family_probs: np.ndarray | None = None
    top_family: str | None = None


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


def _features(dataset: Sequence[DomainExample], space: BigramFeatureSpace):
    cols, cnts = [], []
    for ex in dataset:
        sparse = extract_bigrams(ex.name, space)
        cols.append(np.fromiter(sparse.keys(), dtype=np.int64, count=len(sparse)))
        cnts.append(np.fromiter(sparse.values(), dtype=np.float64, count=len(sparse)))
    return cols, cnts


def train_binary(dataset: Sequence[DomainExample], hyper: BaselineHyper = BaselineHyper()) -> LogisticModel:
    """Detection model: P(malware | bigram counts)."""
    labels = np.array([1.0 if ex.label == LABEL_MALWARE else 0.0 for ex in dataset])
    if len(set(labels.tolist())) < 2:
        raise ConfigurationError("binary training needs both benign and malware examples")
    space = BigramFeatureSpace.build(ex.name for ex in dataset)
    cols, cnts = _features(dataset, space)

    v = np.zeros(space.dimension)
    bias = 0.0
    scale = 1.0
    decay = 1.0 - hyper.learning_rate * hyper.l2
    rng = np.random.default_rng(hyper.seed)
    order = np.arange(len(dataset))
    for _ in range(hyper.epochs):
        rng.shuffle(order)
        for i in order:
            c, n = cols[i], cnts[i]
            logit = scale * float(v[c] @ n) + bias
            err = _sigmoid(logit) - labels[i]
            scale *= decay
            if c.size:
                v[c] -= hyper.learning_rate * err * n / scale
            bias -= hyper.learning_rate * err
            if scale < 1e-150:  # fold the decay in before it underflows
                v *= scale
                scale = 1.0
    return LogisticModel(
        kind=KIND_BINARY,
        feature_space=space,
        weights=v * scale,
        bias=np.array([bias]),
    )


def train_multinomial(dataset: Sequence[DomainExample], hyper: BaselineHyper = BaselineHyper()) -> LogisticModel:
    """Family model: softmax over malware families plus the benign class."""
    classes = tuple(sorted({ex.family for ex in dataset}))
    if len(classes) < 2:
        raise ConfigurationError("multinomial training needs at least two families")
    class_index = {cls: i for i, cls in enumerate(classes)}
    targets = np.array([class_index[ex.family] for ex in dataset])
    space = BigramFeatureSpace.build(ex.name for ex in dataset)
    cols, cnts = _features(dataset, space)

    v = np.zeros((len(classes), space.dimension))
    bias = np.zeros(len(classes))
    scale = 1.0
    decay = 1.0 - hyper.learning_rate * hyper.l2
    rng = np.random.default_rng(hyper.seed)
    order = np.arange(len(dataset))
    for _ in range(hyper.epochs):
        rng.shuffle(order)
        for i in order:
            c, n = cols[i], cnts[i]
            logits = scale * (v[:, c] @ n) + bias
            logits -= logits.max()
            probs = np.exp(logits)
            probs /= probs.sum()
            probs[targets[i]] -= 1.0
            scale *= decay
            if c.size:
                v[:, c] -= hyper.learning_rate * np.outer(probs, n) / scale
            bias -= hyper.learning_rate * probs
            if scale < 1e-150:
                v *= scale
                scale = 1.0
    return LogisticModel(
        kind=KIND_MULTINOMIAL,
        feature_space=space,
        weights=v * scale,
        bias=bias,
        classes=classes,
    )


def predict_baseline(model: LogisticModel, name: str) -> BaselinePrediction:
    """Pure scoring of one name; unknown bigrams contribute nothing."""
    sparse = extract_bigrams(name, model.feature_space)
    c = np.fromiter(sparse.keys(), dtype=np.int64, count=len(sparse))
    n = np.fromiter(sparse.values(), dtype=np.float64, count=len(sparse))
    if model.kind == KIND_BINARY:
        logit = float(model.weights[c] @ n) + float(model.bias[0])
        return BaselinePrediction(name=name, detect_prob=_sigmoid(logit))
    logits = model.weights[:, c] @ n + model.bias
    logits = logits - logits.max()
    probs = np.exp(logits)
    probs /= probs.sum()
    top = model.classes[int(np.argmax(probs))]
    return BaselinePrediction(name=name, family_probs=probs, top_family=top)


class BigramBaseline:
    """Detection + family classification pair, trained on one fold."""

    def __init__(self, detector: LogisticModel, classifier: LogisticModel | None):
        self.detector = detector
        self.classifier = classifier

    @classmethod
    def train(
        cls,
        dataset: Sequence[DomainExample],
        hyper: BaselineHyper = BaselineHyper(),
        with_classifier: bool = True,
    ) -> "BigramBaseline":
        detector = train_binary(dataset, hyper)
        classifier = train_multinomial(dataset, hyper) if with_classifier else None
        return cls(detector, classifier)

    def detection_scores(self, names: Sequence[str]) -> np.ndarray:
        return np.array([predict_baseline(self.detector, n).detect_prob for n in names])

    def predicted_families(self, names: Sequence[str]) -> list[str] | None:
        if self.classifier is None:
            return None
        return [predict_baseline(self.classifier, n).top_family for n in names]


def save_baseline(model: LogisticModel, path: str | Path) -> None:
    ordered = sorted(model.feature_space.bigram_index, key=model.feature_space.bigram_index.get)
    payload = {
        "format": "dgas-bigram",
        "version": 1,
        "kind": model.kind,
        "bigrams": ordered,
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
        "classes": list(model.classes),
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_baseline(path: str | Path) -> LogisticModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: not valid JSON: {exc}") from None
    if payload.get("format") != "dgas-bigram" or payload.get("version") != 1:
        raise InvalidInputError(f"{path}: not a version-1 bigram model file")
    space = BigramFeatureSpace({bg: i for i, bg in enumerate(payload["bigrams"])})
    return LogisticModel(
        kind=payload["kind"],
        feature_space=space,
        weights=np.array(payload["weights"], dtype=np.float64),
        bias=np.array(payload["bias"], dtype=np.float64),
        classes=tuple(payload["classes"]),
    )
