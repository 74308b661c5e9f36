"""RMSProp: scale each update by a running average of squared gradients.

    s <- rho * s + (1 - rho) * g^2
    theta <- theta - lr * g / (sqrt(s) + eps)
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError
from .config import ParameterSet


@dataclass
class OptimizerState:
    """Per-tensor running mean of squared gradients plus hyperparameters."""

    learning_rate: float = 1e-3
    rho: float = 0.9
    epsilon: float = 1e-8
    step_count: int = 0
    mean_square: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_parameters(
        cls,
        params: ParameterSet,
        learning_rate: float = 1e-3,
        rho: float = 0.9,
        epsilon: float = 1e-8,
    ) -> "OptimizerState":
        return cls(
            learning_rate=learning_rate,
            rho=rho,
            epsilon=epsilon,
            mean_square={name: np.zeros_like(t) for name, t in params.tensors.items()},
        )


def rmsprop_update(
    params: ParameterSet,
    grads: dict[str, np.ndarray],
    state: OptimizerState,
) -> tuple[ParameterSet, OptimizerState]:
    """Apply one RMSProp step; returns fresh parameters and state."""
    if set(grads) != set(params.tensors):
        raise ConfigurationError("gradient tensors do not match parameter tensors")
    new_tensors: dict[str, np.ndarray] = {}
    new_ms: dict[str, np.ndarray] = {}
    for name, theta in params.tensors.items():
        g = grads[name]
        if g.shape != theta.shape:
            raise ConfigurationError(f"gradient {name!r} has shape {g.shape}, expected {theta.shape}")
        s = state.rho * state.mean_square[name] + (1.0 - state.rho) * g * g
        new_ms[name] = s
        new_tensors[name] = theta - state.learning_rate * g / (np.sqrt(s) + state.epsilon)
    new_state = OptimizerState(
        learning_rate=state.learning_rate,
        rho=state.rho,
        epsilon=state.epsilon,
        step_count=state.step_count + 1,
        mean_square=new_ms,
    )
    return ParameterSet(new_tensors), new_state


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> dict[str, np.ndarray]:
    """Scale all gradients down so their global L2 norm is at most ``max_norm``."""
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total <= max_norm or total == 0.0:
        return grads
    scale = max_norm / total
    return {name: g * scale for name, g in grads.items()}
