"""Model configuration and parameter storage for the recurrent classifier.

All learnable weights live in a flat name -> float64 array mapping whose
layout is fully determined by the configuration. Gate weights are stored
stacked along the row axis: GRU rows are [update; reset; candidate] and
LSTM rows are [input; forget; output; cell], each block ``hidden_size``
rows tall. The single source of truth for shapes is :func:`tensor_shapes`;
initialization, the optimizer, serialization and the shape check all
iterate it in the same order.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ConfigurationError

CELL_GRU = "gru"
CELL_LSTM = "lstm"
INPUT_ONE_HOT = "one-hot"
INPUT_EMBEDDING = "embedding"
HEADS_DETECT = "detect"
HEADS_CLASSIFY = "classify"
HEADS_BOTH = "both"

GATE_COUNT = {CELL_GRU: 3, CELL_LSTM: 4}


@dataclass(frozen=True)
class ModelConfig:
    """Architecture choices for the character-level recurrent classifier."""

    cell_type: str = CELL_GRU
    hidden_size: int = 512
    input_mode: str = INPUT_ONE_HOT
    embedding_dim: int | None = None
    bidirectional: bool = False
    dense_size: int | None = None
    heads: str = HEADS_BOTH
    families: tuple[str, ...] = ()
    max_sequence_length: int = 75

    def __post_init__(self) -> None:
        if self.cell_type not in GATE_COUNT:
            raise ConfigurationError(f"unknown cell type {self.cell_type!r}")
        if self.input_mode not in (INPUT_ONE_HOT, INPUT_EMBEDDING):
            raise ConfigurationError(f"unknown input mode {self.input_mode!r}")
        if self.heads not in (HEADS_DETECT, HEADS_CLASSIFY, HEADS_BOTH):
            raise ConfigurationError(f"unknown heads value {self.heads!r}")
        if self.hidden_size < 1:
            raise ConfigurationError("hidden_size must be positive")
        if self.max_sequence_length < 1:
            raise ConfigurationError("max_sequence_length must be positive")
        if self.input_mode == INPUT_EMBEDDING:
            if self.embedding_dim is None or self.embedding_dim < 1:
                raise ConfigurationError("embedding mode requires a positive embedding_dim")
        elif self.embedding_dim is not None:
            raise ConfigurationError("embedding_dim is only valid with embedding input")
        if self.dense_size is not None and self.dense_size < 1:
            raise ConfigurationError("dense_size must be positive when set")
        # An empty family list is allowed here: train() resolves it from the
        # data. A non-empty list must be a usable class set.
        if self.has_classify_head and 0 < self.family_count < 2:
            raise ConfigurationError("classify head requires at least two families")
        object.__setattr__(self, "families", tuple(self.families))

    @property
    def has_detect_head(self) -> bool:
        return self.heads in (HEADS_DETECT, HEADS_BOTH)

    @property
    def has_classify_head(self) -> bool:
        return self.heads in (HEADS_CLASSIFY, HEADS_BOTH)

    @property
    def family_count(self) -> int:
        return len(self.families)

    @property
    def directions(self) -> tuple[str, ...]:
        return ("fw", "bw") if self.bidirectional else ("fw",)

    @property
    def feature_size(self) -> int:
        return self.hidden_size * (2 if self.bidirectional else 1)

    @property
    def head_input_size(self) -> int:
        return self.dense_size if self.dense_size is not None else self.feature_size

    def with_families(self, families: tuple[str, ...]) -> "ModelConfig":
        return replace(self, families=tuple(families))


def paper_default_config(families: tuple[str, ...] = ()) -> ModelConfig:
    """One-hot input, 512-unit GRU, no dense layer, both output heads.

    An empty family list is resolved from the data by train().
    """
    return ModelConfig(hidden_size=512, heads=HEADS_BOTH, families=tuple(families))


def desk_config(families: tuple[str, ...] = ()) -> ModelConfig:
    """Same layout as the paper default, scaled to 64 units for CPU runs."""
    return ModelConfig(hidden_size=64, heads=HEADS_BOTH, families=tuple(families))


def input_size(config: ModelConfig, vocab_size: int) -> int:
    if config.input_mode == INPUT_EMBEDDING:
        return int(config.embedding_dim)  # type: ignore[arg-type]
    return vocab_size


def tensor_shapes(config: ModelConfig, vocab_size: int) -> dict[str, tuple[int, ...]]:
    """Canonical tensor layout: name -> shape, in fixed iteration order."""
    if config.has_classify_head and config.family_count < 2:
        raise ConfigurationError("family list is unresolved; train() fills it from the data")
    k = config.hidden_size
    gk = GATE_COUNT[config.cell_type] * k
    d = input_size(config, vocab_size)
    shapes: dict[str, tuple[int, ...]] = {}
    if config.input_mode == INPUT_EMBEDDING:
        shapes["embedding"] = (vocab_size, d)
    for direction in config.directions:
        shapes[f"{direction}.W"] = (gk, d)
        shapes[f"{direction}.U"] = (gk, k)
        shapes[f"{direction}.b"] = (gk,)
    if config.dense_size is not None:
        shapes["dense.W"] = (config.dense_size, config.feature_size)
        shapes["dense.b"] = (config.dense_size,)
    if config.has_detect_head:
        shapes["detect.w"] = (config.head_input_size,)
        shapes["detect.b"] = (1,)
    if config.has_classify_head:
        shapes["classify.W"] = (config.family_count, config.head_input_size)
        shapes["classify.b"] = (config.family_count,)
    return shapes


@dataclass
class ParameterSet:
    """All learnable weights, keyed by tensor name."""

    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def copy(self) -> "ParameterSet":
        return ParameterSet({k: v.copy() for k, v in self.tensors.items()})

    def zeros_like(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.tensors.items()}

    def all_finite(self) -> bool:
        return all(np.isfinite(v).all() for v in self.tensors.values())


def check_shapes(config: ModelConfig, params: ParameterSet, vocab_size: int) -> None:
    """Verify that ``params`` matches the layout implied by ``config``.

    Raises ConfigurationError on any missing, extra, or misshaped tensor.
    Passing this check guarantees forward/backward never hit a dimension
    error.
    """
    expected = tensor_shapes(config, vocab_size)
    missing = expected.keys() - params.tensors.keys()
    extra = params.tensors.keys() - expected.keys()
    if missing:
        raise ConfigurationError(f"missing tensors: {sorted(missing)}")
    if extra:
        raise ConfigurationError(f"unexpected tensors: {sorted(extra)}")
    for name, shape in expected.items():
        actual = params.tensors[name].shape
        if actual != shape:
            raise ConfigurationError(f"tensor {name!r} has shape {actual}, expected {shape}")


def _glorot(rng: np.random.Generator, rows: int, cols: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (cols + fan_out))
    return rng.uniform(-limit, limit, size=(rows, cols))


def init_parameters(config: ModelConfig, vocab_size: int, rng: np.random.Generator) -> ParameterSet:
    """Seeded uniform initialization; biases start at zero except the
    state-retention gates.

    Gate matrices draw per-gate-block limits so stacking does not inflate
    the fan-out. LSTM forget-gate biases start at +1 and GRU update-gate
    biases at -1: both open the state-carry path so the memory horizon at
    initialization spans a whole domain name instead of a few characters.
    """
    k = config.hidden_size
    gates = GATE_COUNT[config.cell_type]
    tensors: dict[str, np.ndarray] = {}
    for name, shape in tensor_shapes(config, vocab_size).items():
        if name.endswith(".b"):
            tensors[name] = np.zeros(shape, dtype=np.float64)
        elif name == "detect.w":
            tensors[name] = _glorot(rng, 1, shape[0], 1).ravel()
        elif name.endswith((".W", ".U")) and name.split(".")[0] in ("fw", "bw"):
            blocks = [_glorot(rng, k, shape[1], k) for _ in range(gates)]
            tensors[name] = np.concatenate(blocks, axis=0)
        else:  # embedding, dense.W, classify.W
            tensors[name] = _glorot(rng, shape[0], shape[1], shape[0])
    for direction in config.directions:
        if config.cell_type == CELL_LSTM:
            tensors[f"{direction}.b"][k : 2 * k] = 1.0
        else:
            tensors[f"{direction}.b"][:k] = -1.0
    return ParameterSet(tensors)


def zero_parameters(config: ModelConfig, vocab_size: int) -> ParameterSet:
    return ParameterSet(
        {name: np.zeros(shape, dtype=np.float64) for name, shape in tensor_shapes(config, vocab_size).items()}
    )
