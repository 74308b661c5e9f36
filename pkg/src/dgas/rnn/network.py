"""Whole-network forward pass, joint loss, and backpropagation through time.

The network encodes a domain as a sequence of character vectors (one-hot
columns or learned embeddings), runs one or two recurrent directions over
it, and feeds the final state(s) — optionally through a rectified dense
layer — into a sigmoid detection head and/or a softmax family head.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError
from .cells import CellParams, DirectionTrace, backward_direction, run_direction, sigmoid
from .config import INPUT_EMBEDDING, ModelConfig, ParameterSet


@dataclass
class Targets:
    """Supervision for one example; ``None`` drops the matching loss term."""

    label: int | None = None          # 1 = malware, 0 = benign
    family_index: int | None = None   # row into the family list
    weight_detect: float = 1.0
    weight_classify: float = 1.0


@dataclass
class ForwardTrace:
    """Everything recorded during one forward pass, enough for exact BPTT."""

    indices: np.ndarray                     # 1-based character indices
    columns: np.ndarray                     # 0-based, in input order
    directions: dict[str, DirectionTrace]
    embedded: np.ndarray | None             # (T, E) in embedding mode
    feature: np.ndarray                     # concatenated final states
    dense_pre: np.ndarray | None            # dense pre-activation
    head_input: np.ndarray
    detect_logit: float | None
    detect_prob: float | None
    class_logits: np.ndarray | None
    class_probs: np.ndarray | None


@dataclass
class ForwardOutput:
    detect_prob: float | None
    family_probs: np.ndarray | None
    trace: ForwardTrace


def _cell_params(config: ModelConfig, params: ParameterSet, direction: str) -> CellParams:
    return CellParams(
        kind=config.cell_type,
        W=params[f"{direction}.W"],
        U=params[f"{direction}.U"],
        b=params[f"{direction}.b"],
    )


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    return exp / exp.sum()


def forward(indices: np.ndarray, config: ModelConfig, params: ParameterSet) -> ForwardOutput:
    """Run the classifier over an encoded domain.

    ``indices`` is a 1-based index sequence from :func:`dgas.vocab.encode_domain`.
    Parameters must already satisfy the shape check for ``config``.
    """
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        raise InvalidInputError("cannot run the network on an empty index sequence")
    cols = indices - 1

    embedded = None
    if config.input_mode == INPUT_EMBEDDING:
        embedded = params["embedding"][cols]

    traces: dict[str, DirectionTrace] = {}
    finals = []
    for direction in config.directions:
        cell = _cell_params(config, params, direction)
        ordered = cols if direction == "fw" else cols[::-1]
        if embedded is None:
            wx = cell.W[:, ordered].T
        else:
            x_dir = embedded if direction == "fw" else embedded[::-1]
            wx = x_dir @ cell.W.T
        trace = run_direction(wx, cell)
        traces[direction] = trace
        finals.append(trace.final_state)
    feature = np.concatenate(finals) if len(finals) > 1 else finals[0]

    dense_pre = None
    head_input = feature
    if config.dense_size is not None:
        dense_pre = params["dense.W"] @ feature + params["dense.b"]
        head_input = np.maximum(dense_pre, 0.0)

    detect_logit = detect_prob = None
    if config.has_detect_head:
        detect_logit = float(params["detect.w"] @ head_input + params["detect.b"][0])
        detect_prob = float(sigmoid(np.array([detect_logit]))[0])

    class_logits = class_probs = None
    if config.has_classify_head:
        class_logits = params["classify.W"] @ head_input + params["classify.b"]
        class_probs = _softmax(class_logits)

    trace = ForwardTrace(
        indices=indices,
        columns=cols,
        directions=traces,
        embedded=embedded,
        feature=feature,
        dense_pre=dense_pre,
        head_input=head_input,
        detect_logit=detect_logit,
        detect_prob=detect_prob,
        class_logits=class_logits,
        class_probs=class_probs,
    )
    return ForwardOutput(detect_prob=detect_prob, family_probs=class_probs, trace=trace)


def joint_loss(
    detect_prob: float | None,
    family_probs: np.ndarray | None,
    label: int | None,
    family_index: int | None,
    weight_detect: float = 1.0,
    weight_classify: float = 1.0,
) -> float:
    """Weighted sum of binary and categorical cross-entropy.

    Terms whose head output or target is missing are dropped. The result
    is 0 exactly when every active head puts probability 1 on its target.
    """
    total = 0.0
    if detect_prob is not None and label is not None:
        p = detect_prob if label == 1 else 1.0 - detect_prob
        total += weight_detect * (-np.log(p) if p > 0.0 else np.inf)
    if family_probs is not None and family_index is not None:
        p = family_probs[family_index]
        total += weight_classify * (-np.log(p) if p > 0.0 else np.inf)
    return float(total)


def _softplus(x: float) -> float:
    return float(np.log1p(np.exp(-abs(x))) + max(x, 0.0))


def trace_loss(trace: ForwardTrace, targets: Targets) -> float:
    """Same quantity as :func:`joint_loss`, computed from logits for stability."""
    total = 0.0
    if trace.detect_logit is not None and targets.label is not None:
        logit = trace.detect_logit
        total += targets.weight_detect * (_softplus(logit) - targets.label * logit)
    if trace.class_logits is not None and targets.family_index is not None:
        logits = trace.class_logits
        shifted = logits - logits.max()
        log_norm = float(np.log(np.exp(shifted).sum()) + logits.max())
        total += targets.weight_classify * (log_norm - float(logits[targets.family_index]))
    return total


def backward(
    trace: ForwardTrace,
    targets: Targets,
    config: ModelConfig,
    params: ParameterSet,
) -> dict[str, np.ndarray]:
    """Gradients of :func:`trace_loss` w.r.t. every parameter tensor.

    The trace must come from a forward pass on these exact parameters;
    mutating params in between silently corrupts the result.
    """
    grads: dict[str, np.ndarray] = {}
    head_in = trace.head_input
    d_head = np.zeros_like(head_in)

    if config.has_detect_head:
        if targets.label is not None:
            d_logit = targets.weight_detect * (trace.detect_prob - targets.label)
        else:
            d_logit = 0.0
        grads["detect.w"] = d_logit * head_in
        grads["detect.b"] = np.array([d_logit])
        d_head += d_logit * params["detect.w"]

    if config.has_classify_head:
        if targets.family_index is not None:
            d_logits = trace.class_probs.copy()
            d_logits[targets.family_index] -= 1.0
            d_logits *= targets.weight_classify
        else:
            d_logits = np.zeros_like(trace.class_probs)
        grads["classify.W"] = np.outer(d_logits, head_in)
        grads["classify.b"] = d_logits
        d_head += params["classify.W"].T @ d_logits

    if config.dense_size is not None:
        d_pre = d_head * (trace.dense_pre > 0.0)
        grads["dense.W"] = np.outer(d_pre, trace.feature)
        grads["dense.b"] = d_pre
        d_feature = params["dense.W"].T @ d_pre
    else:
        d_feature = d_head

    k = config.hidden_size
    d_embed = None
    if config.input_mode == INPUT_EMBEDDING:
        d_embed = np.zeros_like(params["embedding"])

    for pos, direction in enumerate(config.directions):
        cell = _cell_params(config, params, direction)
        d_final = d_feature[pos * k : (pos + 1) * k]
        d_act, cell_grads = backward_direction(trace.directions[direction], cell, d_final)
        grads[f"{direction}.U"] = cell_grads["U"]
        grads[f"{direction}.b"] = cell_grads["b"]
        ordered = trace.columns if direction == "fw" else trace.columns[::-1]
        if d_embed is None:
            dWt = np.zeros((cell.W.shape[1], cell.W.shape[0]))
            np.add.at(dWt, ordered, d_act)
            grads[f"{direction}.W"] = dWt.T
        else:
            x_dir = trace.embedded if direction == "fw" else trace.embedded[::-1]
            grads[f"{direction}.W"] = d_act.T @ x_dir
            np.add.at(d_embed, ordered, d_act @ cell.W)

    if d_embed is not None:
        grads["embedding"] = d_embed
    return grads
