"""
Versioned binary checkpoint container.

Layout, little endian throughout::

    b"MFCK" | uint32 version | uint32 config length | config JSON
    | uint32 tensor count
    | per tensor: uint32 name length | name UTF-8 | uint32 rank | uint32 dims[rank] | float32 values
"""
import hashlib
import json
import struct
from collections import OrderedDict
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple

import numpy as np
import torch

from molforge.data import PathLike
from molforge.errors import CheckpointError

MAGIC = b"MFCK"
VERSION = 1


def encode_checkpoint(tensors: Mapping[str, torch.Tensor], config: Mapping[str, Any]) -> bytes:
    """
    Serialize named tensors and a config echo.

    :param tensors: tensors in the order to store them
    :param config: JSON serializable configuration
    """
    config_bytes = json.dumps(config, sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<II", VERSION, len(config_bytes)), config_bytes, struct.pack("<I", len(tensors))]
    for name, tensor in tensors.items():
        name_bytes = name.encode("utf-8")
        values = tensor.detach().cpu().numpy().astype("<f4", copy=False)
        parts.append(struct.pack("<I", len(name_bytes)))
        parts.append(name_bytes)
        parts.append(struct.pack(f"<I{values.ndim}I", values.ndim, *values.shape))
        parts.append(np.ascontiguousarray(values).tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.payload):
            raise CheckpointError(f"checkpoint truncated at byte {self.offset}")
        chunk = self.payload[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def uint32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]


def decode_checkpoint(payload: bytes) -> Tuple[Dict[str, Any], "OrderedDict[str, torch.Tensor]"]:
    """
    Inverse of :func:`encode_checkpoint`.

    :return: config and float32 tensors in stored order
    """
    reader = _Reader(payload)
    if reader.take(4) != MAGIC:
        raise CheckpointError("not a molforge checkpoint")
    version = reader.uint32()
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}, expected {VERSION}")
    try:
        config = json.loads(reader.take(reader.uint32()).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError("checkpoint config block is not valid JSON") from exc
    tensors: "OrderedDict[str, torch.Tensor]" = OrderedDict()
    for _ in range(reader.uint32()):
        name = reader.take(reader.uint32()).decode("utf-8")
        rank = reader.uint32()
        shape = struct.unpack(f"<{rank}I", reader.take(4 * rank))
        size = int(np.prod(shape, dtype=np.int64))
        values = np.frombuffer(reader.take(4 * size), dtype="<f4").reshape(shape)
        tensors[name] = torch.from_numpy(values.astype(np.float32))
    if reader.offset != len(payload):
        raise CheckpointError(f"{len(payload) - reader.offset} trailing bytes after the last tensor")
    return config, tensors


def save_checkpoint(path: PathLike, tensors: Mapping[str, torch.Tensor], config: Mapping[str, Any]) -> str:
    """
    Write a checkpoint file.

    :return: sha256 of the written bytes
    """
    payload = encode_checkpoint(tensors, config)
    Path(path).write_bytes(payload)
    return hashlib.sha256(payload).hexdigest()


def load_checkpoint(path: PathLike) -> Tuple[Dict[str, Any], "OrderedDict[str, torch.Tensor]"]:
    return decode_checkpoint(Path(path).read_bytes())
