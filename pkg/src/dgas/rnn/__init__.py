"""From-scratch character-level recurrent classifier."""
from .cells import CellParams, gru_step, lstm_step
from .config import (
    ModelConfig,
    ParameterSet,
    check_shapes,
    desk_config,
    init_parameters,
    paper_default_config,
    tensor_shapes,
    zero_parameters,
)
from .io import deserialize_model, load_model, model_to_json, save_model, serialize_model
from .model import Prediction, TrainedModel
from .network import ForwardTrace, Targets, backward, forward, joint_loss, trace_loss
from .optimizer import OptimizerState, clip_gradients, rmsprop_update
from .train import TrainingParams, TrainingResult, train

__all__ = [
    "CellParams",
    "ForwardTrace",
    "ModelConfig",
    "OptimizerState",
    "ParameterSet",
    "Prediction",
    "Targets",
    "TrainedModel",
    "TrainingParams",
    "TrainingResult",
    "backward",
    "check_shapes",
    "clip_gradients",
    "deserialize_model",
    "desk_config",
    "forward",
    "gru_step",
    "init_parameters",
    "joint_loss",
    "load_model",
    "lstm_step",
    "model_to_json",
    "paper_default_config",
    "rmsprop_update",
    "save_model",
    "serialize_model",
    "tensor_shapes",
    "trace_loss",
    "train",
    "zero_parameters",
]
