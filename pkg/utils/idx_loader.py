"""
Reader for MNIST-style IDX files.

Data format (big endian):
    images: i32 magic 0x00000803 | i32 count | i32 rows | i32 cols | u8[] pixels (row-wise)
    labels: i32 magic 0x00000801 | i32 count | u8[] labels
Files may be gzip-compressed (``.gz`` suffix).
"""

import gzip
import os
import struct
from typing import Tuple

import numpy as np

from logger_utils import logger, log_decorator
from snn.errors import IdxFormatError
from .datasets import Dataset

MNIST_IMAGE_MAGIC = 0x00000803
MNIST_LABEL_MAGIC = 0x00000801

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def _read_bytes(path: str) -> bytes:
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rb") as f:
        return f.read()


def _read_header(data: bytes, fields: int, expected_magic: int, path: str) -> Tuple[int, ...]:
    size = 4 * fields
    if len(data) < size:
        raise IdxFormatError(f"{path}: header truncated, expected {size} bytes", len(data))
    header = struct.unpack(f">{fields}I", data[:size])
    if header[0] != expected_magic:
        raise IdxFormatError(
            f"{path}: magic number mismatch (0x{header[0]:08x}, expected 0x{expected_magic:08x})", 0
        )
    return header


def read_idx_images(path: str) -> np.ndarray:
    """Raw uint8 pixels, shape (count, rows, cols)."""
    data = _read_bytes(path)
    _, count, rows, cols = _read_header(data, 4, MNIST_IMAGE_MAGIC, path)
    expected = count * rows * cols
    payload = data[16:]
    if len(payload) < expected:
        raise IdxFormatError(
            f"{path}: pixel payload truncated, {len(payload)} of {expected} bytes present", 16 + len(payload)
        )
    return np.frombuffer(payload, dtype=np.uint8, count=expected).reshape(count, rows, cols)


def read_idx_labels(path: str) -> np.ndarray:
    """Raw uint8 labels, shape (count,)."""
    data = _read_bytes(path)
    _, count = _read_header(data, 2, MNIST_LABEL_MAGIC, path)
    payload = data[8:]
    if len(payload) < count:
        raise IdxFormatError(
            f"{path}: label payload truncated, {len(payload)} of {count} bytes present", 8 + len(payload)
        )
    return np.frombuffer(payload, dtype=np.uint8, count=count)


@log_decorator("load_idx")
def load_idx(images_path: str, labels_path: str, split: str = "train", num_classes: int = 10) -> Dataset:
    """
    Load an image/label IDX pair into a Dataset with pixels scaled by 1/255.

    Args:
        images_path: path to the idx3 image file
        labels_path: path to the idx1 label file
        split: "train" or "test"
        num_classes: number of classes

    Returns:
        Dataset: the loaded split
    """
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if len(images) != len(labels):
        # counts sit right after the magic in both headers
        raise IdxFormatError(f"image count {len(images)} != label count {len(labels)}", 4)
    logger.info(f"Loaded {len(images)} {split} images of {images.shape[1]}x{images.shape[2]} from {images_path}")
    return Dataset(
        images=images.astype(np.float64) / 255.0,
        labels=labels.astype(np.int64),
        split=split,
        num_classes=num_classes,
    )


def load_mnist(data_dir: str, split: str = "train") -> Dataset:
    """Locate the canonical MNIST file pair for ``split`` in ``data_dir``, plain or gzipped."""
    names = MNIST_FILES[split]
    paths = []
    for name in names:
        candidates = [os.path.join(data_dir, name), os.path.join(data_dir, name + ".gz")]
        found = next((p for p in candidates if os.path.exists(p)), None)
        if found is None:
            raise FileNotFoundError(f"Could not find {name}[.gz] in {data_dir}")
        paths.append(found)
    return load_idx(paths[0], paths[1], split=split)
