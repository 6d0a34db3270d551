"""
Binary model checkpoints.

Layout (all integers little-endian):

    magic   4 bytes  b"SNNC"
    version uint16
    layers  uint32
    arch    uint32 length + UTF-8 descriptor
    epoch   int64    global epoch counter
    seed    int64    experiment root seed (every stream is derived from it)
    per layer:
        ndim uint8, dims uint32 * ndim, values float64 * prod(dims)
        has_mask uint8 [, packed bits ceil(size / 8)]
        has_alpha uint8 [, alpha float64]

No timestamps are written, so identical networks give identical files.
"""

import os
import struct
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from logger_utils import logger, log_decorator
from snn.errors import CheckpointFormatError
from snn.network import SpikingNetwork, network_from_weights

MAGIC = b"SNNC"
VERSION = 1
SUFFIX = ".ckpt"


@dataclass(frozen=True)
class LayerRecord:
    values: np.ndarray
    mask: Optional[np.ndarray] = None
    alpha: Optional[float] = None


@dataclass(frozen=True)
class Checkpoint:
    architecture: str
    layers: Tuple[LayerRecord, ...]
    epoch: int = 0
    rng_seed: int = 0

    @classmethod
    def from_network(cls, net: SpikingNetwork, epoch: int = 0, rng_seed: int = 0) -> "Checkpoint":
        layers = tuple(LayerRecord(l.values.copy(), None if l.mask is None else np.asarray(l.mask, dtype=float),
                                   l.alpha)
                       for l in net.layers)
        return cls(architecture=net.architecture, layers=layers, epoch=int(epoch), rng_seed=int(rng_seed))

    def to_network(self) -> SpikingNetwork:
        net = network_from_weights(self.architecture, [l.values for l in self.layers])
        for i, record in enumerate(self.layers):
            net = net.with_layer(i, mask=record.mask, alpha=record.alpha)
        return net

    def describe(self) -> dict:
        return {"architecture": self.architecture, "epoch": self.epoch, "layers": len(self.layers)}

    # ------------------------------------------------------------ encoding

    def to_bytes(self) -> bytes:
        arch = self.architecture.encode("utf-8")
        parts = [
            struct.pack("<4sHI", MAGIC, VERSION, len(self.layers)),
            struct.pack("<I", len(arch)),
            arch,
            struct.pack("<qq", self.epoch, self.rng_seed),
        ]
        for record in self.layers:
            values = np.asarray(record.values, dtype="<f8")
            parts.append(struct.pack(f"<B{values.ndim}I", values.ndim, *values.shape))
            parts.append(values.tobytes(order="C"))
            if record.mask is None:
                parts.append(struct.pack("<B", 0))
            else:
                bits = np.packbits(np.asarray(record.mask).ravel() != 0)
                parts.append(struct.pack("<B", 1))
                parts.append(bits.tobytes())
            if record.alpha is None:
                parts.append(struct.pack("<B", 0))
            else:
                parts.append(struct.pack("<Bd", 1, float(record.alpha)))
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Checkpoint":
        reader = _Reader(data)
        magic, version, num_layers = reader.unpack("<4sHI")
        if magic != MAGIC:
            raise CheckpointFormatError(f"Not a checkpoint: magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise CheckpointFormatError(f"Unsupported checkpoint version {version}")
        (arch_len,) = reader.unpack("<I")
        architecture = reader.take(arch_len).decode("utf-8")
        epoch, rng_seed = reader.unpack("<qq")

        layers: List[LayerRecord] = []
        for _ in range(num_layers):
            (ndim,) = reader.unpack("<B")
            shape = reader.unpack(f"<{ndim}I")
            size = int(np.prod(shape))
            values = np.frombuffer(reader.take(8 * size), dtype="<f8").reshape(shape).astype(float)
            mask = None
            if reader.unpack("<B")[0]:
                bits = np.frombuffer(reader.take((size + 7) // 8), dtype=np.uint8)
                mask = np.unpackbits(bits, count=size).reshape(shape).astype(float)
            alpha = None
            if reader.unpack("<B")[0]:
                (alpha,) = reader.unpack("<d")
            layers.append(LayerRecord(values, mask, alpha))
        if reader.remaining:
            raise CheckpointFormatError(f"{reader.remaining} trailing bytes after the last layer")
        return cls(architecture, tuple(layers), int(epoch), int(rng_seed))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    @property
    def remaining(self) -> int:
        return len(self.data) - self.offset

    def take(self, count: int) -> bytes:
        if count > self.remaining:
            raise CheckpointFormatError(
                f"Checkpoint truncated at byte {self.offset}: need {count} bytes, {self.remaining} left"
            )
        chunk = self.data[self.offset:self.offset + count]
        self.offset += count
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


@log_decorator("save_checkpoint")
def save_checkpoint(path: str, checkpoint: Checkpoint) -> str:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "wb") as f:
        f.write(checkpoint.to_bytes())
    logger.info(f"Saved checkpoint {path} ({checkpoint.architecture}, epoch {checkpoint.epoch})")
    return path


@log_decorator("load_checkpoint")
def load_checkpoint(path: str) -> Checkpoint:
    if not os.path.exists(path):
        raise CheckpointFormatError(f"Checkpoint not found: {path}")
    with open(path, "rb") as f:
        return Checkpoint.from_bytes(f.read())


class CheckpointManager:
    """Named checkpoints inside one run directory."""

    def __init__(self, storage_dir: str = "runs"):
        self.storage_dir = storage_dir
        os.makedirs(storage_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.storage_dir, name if name.endswith(SUFFIX) else f"{name}{SUFFIX}")

    def save(self, name: str, checkpoint: Checkpoint) -> str:
        return save_checkpoint(self.path(name), checkpoint)

    def load(self, name: str) -> Optional[Checkpoint]:
        path = self.path(name)
        if not os.path.exists(path):
            return None
        return load_checkpoint(path)

    def list_checkpoints(self) -> List[dict]:
        found = []
        for filename in sorted(os.listdir(self.storage_dir)):
            if filename.endswith(SUFFIX):
                checkpoint = load_checkpoint(os.path.join(self.storage_dir, filename))
                found.append({"name": filename[:-len(SUFFIX)], **checkpoint.describe()})
        return found
