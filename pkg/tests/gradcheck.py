"""Shared finite-difference gradient oracle for the recurrent classifier.

Central differences with a small epsilon, applied to every scalar in every
parameter tensor. Deliberately independent of the analytic backward pass:
it only drives forward() and trace_loss().
"""
from __future__ import annotations

import numpy as np

from dgas.rnn import ModelConfig, ParameterSet, Targets, forward, trace_loss


def finite_difference_grads(
    indices: np.ndarray,
    config: ModelConfig,
    params: ParameterSet,
    targets: Targets,
    eps: float = 1e-4,
) -> dict[str, np.ndarray]:
    grads: dict[str, np.ndarray] = {}
    for name, tensor in params.tensors.items():
        flat = tensor.ravel()
        grad = np.zeros(flat.size)
        for j in range(flat.size):
            saved = flat[j]
            flat[j] = saved + eps
            loss_plus = trace_loss(forward(indices, config, params).trace, targets)
            flat[j] = saved - eps
            loss_minus = trace_loss(forward(indices, config, params).trace, targets)
            flat[j] = saved
            grad[j] = (loss_plus - loss_minus) / (2.0 * eps)
        grads[name] = grad.reshape(tensor.shape)
    return grads


def max_relative_error(
    analytic: dict[str, np.ndarray],
    numeric: dict[str, np.ndarray],
    absolute_floor: float = 1e-6,
) -> float:
    """Worst relative error across tensors; values under the floor count as equal."""
    worst = 0.0
    for name, a in analytic.items():
        n = numeric[name]
        diff = np.abs(a - n)
        scale = np.maximum(np.abs(a), np.abs(n))
        mask = diff > absolute_floor
        if mask.any():
            worst = max(worst, float((diff[mask] / scale[mask]).max()))
    return worst
