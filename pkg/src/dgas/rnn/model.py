"""Immutable trained-model wrapper and inference entry points.

A :class:`TrainedModel` is shape-checked once at construction and never
mutated afterwards, so inference is a pure read and safe to call from any
number of threads.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ConfigurationError
from ..vocab import CharVocabulary, encode_domain
from .config import ModelConfig, ParameterSet, check_shapes
from .network import forward


@dataclass(frozen=True)
class Prediction:
    name: str
    detect_prob: float | None
    family_probs: np.ndarray | None
    top_family: str | None


@dataclass(frozen=True)
class TrainedModel:
    config: ModelConfig
    params: ParameterSet
    vocab: CharVocabulary

    def __post_init__(self) -> None:
        check_shapes(self.config, self.params, self.vocab.size)

    def predict(self, name: str) -> Prediction:
        """Score one domain name. Pure function of (model, name)."""
        indices = encode_domain(name, self.vocab, self.config.max_sequence_length)
        out = forward(indices, self.config, self.params)
        top = None
        if out.family_probs is not None:
            # Ties break toward the lowest family index.
            top = self.config.families[int(np.argmax(out.family_probs))]
        return Prediction(
            name=name,
            detect_prob=out.detect_prob,
            family_probs=out.family_probs,
            top_family=top,
        )

    def detection_scores(self, names: Sequence[str]) -> np.ndarray:
        if not self.config.has_detect_head:
            raise ConfigurationError("model has no detection head")
        return np.array([self.predict(n).detect_prob for n in names], dtype=np.float64)

    def predicted_families(self, names: Sequence[str]) -> list[str] | None:
        if not self.config.has_classify_head:
            return None
        return [self.predict(n).top_family for n in names]
