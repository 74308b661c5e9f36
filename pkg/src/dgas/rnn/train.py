"""Seeded training loop: per-example BPTT with batched gradient accumulation.

Examples are processed one at a time at their natural length (no padding);
gradients are summed over each batch, averaged, clipped, and applied with
RMSProp. Everything that consumes randomness (initialization, shuffling)
draws from one seeded generator, so a (dataset, config, hyper, seed) tuple
fully determines the trained weights.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..data.examples import LABEL_MALWARE, DomainExample
from ..errors import ConfigurationError
from ..vocab import CharVocabulary, encode_domain
from .config import ModelConfig, ParameterSet, init_parameters
from .model import TrainedModel
from .network import Targets, backward, forward, trace_loss
from .optimizer import OptimizerState, clip_gradients, rmsprop_update


@dataclass(frozen=True)
class TrainingParams:
    batch_size: int = 256
    epochs: int = 2
    seed: int = 0
    learning_rate: float = 1e-3
    rho: float = 0.9
    epsilon: float = 1e-8
    weight_detect: float = 1.0
    weight_classify: float = 1.0
    clip_norm: float = 5.0
    warmup_batches: int = 0  # linear learning-rate ramp-in


@dataclass
class TrainingResult:
    model: TrainedModel
    batch_losses: list[float] = field(default_factory=list)

    @property
    def params(self) -> ParameterSet:
        return self.model.params

    @property
    def final_loss(self) -> float | None:
        return self.batch_losses[-1] if self.batch_losses else None


def resolve_families(config: ModelConfig, dataset: Sequence[DomainExample]) -> ModelConfig:
    """Fill in the family list from the data when the config leaves it open."""
    if not config.has_classify_head:
        return config
    if config.families:
        known = set(config.families)
        unknown = {ex.family for ex in dataset} - known
        if unknown:
            raise ConfigurationError(f"dataset families not in config: {sorted(unknown)}")
        return config
    return config.with_families(tuple(sorted({ex.family for ex in dataset})))


def train(
    dataset: Sequence[DomainExample],
    config: ModelConfig,
    hyper: TrainingParams = TrainingParams(),
    vocab: CharVocabulary | None = None,
) -> TrainingResult:
    """Train a recurrent classifier; returns the model and per-batch mean losses."""
    if not dataset:
        raise ConfigurationError("training dataset is empty")
    if vocab is None:
        vocab = CharVocabulary.default()
    if config.has_detect_head:
        labels = {ex.label for ex in dataset}
        if len(labels) < 2:
            raise ConfigurationError(
                "detection training needs both benign and malware examples"
            )
    config = resolve_families(config, dataset)
    family_index = {fam: i for i, fam in enumerate(config.families)}

    rng = np.random.default_rng(hyper.seed)
    params = init_parameters(config, vocab.size, rng)
    state = OptimizerState.for_parameters(
        params, hyper.learning_rate, hyper.rho, hyper.epsilon
    )

    encoded = [encode_domain(ex.name, vocab, config.max_sequence_length) for ex in dataset]
    targets = [
        Targets(
            label=1 if ex.label == LABEL_MALWARE else 0,
            family_index=family_index[ex.family] if config.has_classify_head else None,
            weight_detect=hyper.weight_detect,
            weight_classify=hyper.weight_classify,
        )
        for ex in dataset
    ]

    losses: list[float] = []
    order = np.arange(len(dataset))
    for _ in range(hyper.epochs):
        rng.shuffle(order)
        for start in range(0, len(order), hyper.batch_size):
            batch = order[start : start + hyper.batch_size]
            accum = params.zeros_like()
            batch_loss = 0.0
            for i in batch:
                out = forward(encoded[i], config, params)
                batch_loss += trace_loss(out.trace, targets[i])
                for name, grad in backward(out.trace, targets[i], config, params).items():
                    accum[name] += grad
            inv = 1.0 / len(batch)
            for name in accum:
                accum[name] *= inv
            if hyper.warmup_batches and state.step_count < hyper.warmup_batches:
                ramp = (state.step_count + 1) / hyper.warmup_batches
                state.learning_rate = hyper.learning_rate * ramp
            params, state = rmsprop_update(params, clip_gradients(accum, hyper.clip_norm), state)
            losses.append(batch_loss * inv)

    return TrainingResult(model=TrainedModel(config, params, vocab), batch_losses=losses)
