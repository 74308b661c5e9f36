"""Versioned binary model container plus a JSON export for inspection.

Layout (all integers little-endian):

    magic   4 bytes  "DGAM"
    version u16
    vocab   u32 byte length, UTF-8 of the character list in index order
    config  cell u8, input-mode u8, embedding-dim u32, hidden u32,
            bidirectional u8, dense u32, heads u8, max-seq u32,
            family count u32, then per family: u16 length + UTF-8
    tensors u32 count, then per tensor:
            u16 name length + UTF-8, u8 ndim, ndim * u32 dims,
            row-major float64 payload

The container carries the vocabulary and family names, so a model file is
self-sufficient: predictions do not depend on anything in the environment.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import (
    ConfigurationError,
    ModelFormatError,
    ShapeInconsistencyError,
    TruncatedStreamError,
    UnsupportedVersionError,
)
from ..vocab import CharVocabulary
from .config import ModelConfig, ParameterSet, tensor_shapes
from .model import TrainedModel

MAGIC = b"DGAM"
FORMAT_VERSION = 1

_CELLS = ["gru", "lstm"]
_MODES = ["one-hot", "embedding"]
_HEADS = ["detect", "classify", "both"]


def serialize_model(config: ModelConfig, params: ParameterSet, vocab: CharVocabulary) -> bytes:
    parts = [MAGIC, struct.pack("<H", FORMAT_VERSION)]
    vocab_bytes = "".join(vocab.characters).encode("utf-8")
    parts.append(struct.pack("<I", len(vocab_bytes)))
    parts.append(vocab_bytes)
    parts.append(
        struct.pack(
            "<BBIIBIBI",
            _CELLS.index(config.cell_type),
            _MODES.index(config.input_mode),
            config.embedding_dim or 0,
            config.hidden_size,
            int(config.bidirectional),
            config.dense_size or 0,
            _HEADS.index(config.heads) + 1,
            config.max_sequence_length,
        )
    )
    parts.append(struct.pack("<I", len(config.families)))
    for family in config.families:
        encoded = family.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)

    names = list(tensor_shapes(config, vocab.size))
    parts.append(struct.pack("<I", len(names)))
    for name in names:
        tensor = params[name]
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", tensor.ndim))
        parts.append(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
        parts.append(np.ascontiguousarray(tensor, dtype="<f8").tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.data):
            raise TruncatedStreamError(
                f"stream ends at byte {len(self.data)}, needed {self.pos + count}"
            )
        chunk = self.data[self.pos : self.pos + count]
        self.pos += count
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def deserialize_model(data: bytes) -> TrainedModel:
    reader = _Reader(data)
    if reader.take(4) != MAGIC:
        raise ModelFormatError("not a model container (bad magic bytes)")
    (version,) = reader.unpack("<H")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"format version {version}, expected {FORMAT_VERSION}")

    (vocab_len,) = reader.unpack("<I")
    try:
        characters = reader.take(vocab_len).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ModelFormatError(f"vocabulary is not valid UTF-8: {exc}") from None
    cell, mode, embed_dim, hidden, bidi, dense, heads, max_seq = reader.unpack("<BBIIBIBI")
    (family_count,) = reader.unpack("<I")
    families = []
    for _ in range(family_count):
        (name_len,) = reader.unpack("<H")
        families.append(reader.take(name_len).decode("utf-8"))

    try:
        if not (0 <= cell < len(_CELLS)) or not (0 <= mode < len(_MODES)) or not (1 <= heads <= 3):
            raise ModelFormatError("config fields out of range")
        config = ModelConfig(
            cell_type=_CELLS[cell],
            input_mode=_MODES[mode],
            embedding_dim=embed_dim or None,
            hidden_size=hidden,
            bidirectional=bool(bidi),
            dense_size=dense or None,
            heads=_HEADS[heads - 1],
            families=tuple(families),
            max_sequence_length=max_seq,
        )
        vocab = CharVocabulary(characters)
    except ConfigurationError as exc:
        raise ShapeInconsistencyError(f"decoded config is inconsistent: {exc}") from None

    (tensor_count,) = reader.unpack("<I")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(tensor_count):
        (name_len,) = reader.unpack("<H")
        name = reader.take(name_len).decode("utf-8")
        (ndim,) = reader.unpack("<B")
        dims = reader.unpack(f"<{ndim}I")
        count = 1
        for dim in dims:  # plain ints: corrupt dims must not overflow silently
            count *= dim
        payload = reader.take(8 * count)
        tensors[name] = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(dims)
    if reader.pos != len(data):
        raise ModelFormatError(f"{len(data) - reader.pos} trailing bytes after container")

    try:
        return TrainedModel(config, ParameterSet(tensors), vocab)
    except ConfigurationError as exc:
        raise ShapeInconsistencyError(str(exc)) from None


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_bytes(serialize_model(model.config, model.params, model.vocab))


def load_model(path: str | Path) -> TrainedModel:
    return deserialize_model(Path(path).read_bytes())


def model_to_json(model: TrainedModel) -> str:
    """Human-inspectable JSON mirror of the binary container."""
    config = model.config
    payload = {
        "format": "dgas-model",
        "version": FORMAT_VERSION,
        "vocabulary": list(model.vocab.characters),
        "config": {
            "cell_type": config.cell_type,
            "input_mode": config.input_mode,
            "embedding_dim": config.embedding_dim,
            "hidden_size": config.hidden_size,
            "bidirectional": config.bidirectional,
            "dense_size": config.dense_size,
            "heads": config.heads,
            "families": list(config.families),
            "max_sequence_length": config.max_sequence_length,
        },
        "tensors": {
            name: model.params[name].tolist()
            for name in tensor_shapes(config, model.vocab.size)
        },
    }
    return json.dumps(payload, indent=2)
