"""
In-memory datasets, mini-batching and the synthetic two-class toy set.
"""

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from snn.errors import RangeError


@dataclass(frozen=True)
class Dataset:
    """
    Images normalised to [0, 1] with integer class labels.

    Args:
        images: (count, *image_shape)
        labels: (count,) integers below ``num_classes``
        split: "train" or "test"
        num_classes: number of classes
    """
    images: np.ndarray
    labels: np.ndarray
    split: str = "train"
    num_classes: int = 10

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise RangeError(f"{len(self.images)} images but {len(self.labels)} labels")
        if self.split not in ("train", "test"):
            raise RangeError(f"split must be 'train' or 'test', got '{self.split}'")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise RangeError(f"labels must lie in [0, {self.num_classes})")
        if self.images.size and (self.images.min() < 0.0 or self.images.max() > 1.0):
            raise RangeError("pixel values must lie in [0, 1]")

    def __len__(self) -> int:
        return int(len(self.labels))

    @property
    def image_shape(self):
        return tuple(self.images.shape[1:])

    def describe(self) -> dict:
        return {"split": self.split, "count": len(self), "image_shape": self.image_shape}

    def subset(self, limit: Optional[int]) -> "Dataset":
        """First ``limit`` items, or the whole set when ``limit`` is falsy."""
        if not limit or limit >= len(self):
            return self
        return Dataset(self.images[:limit], self.labels[:limit], self.split, self.num_classes)

    def one_hot(self, labels: np.ndarray) -> np.ndarray:
        return np.eye(self.num_classes)[labels]


@dataclass(frozen=True)
class Batch:
    indices: np.ndarray
    images: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return int(len(self.indices))


def batches(dataset: Dataset, batch_size: int, shuffle_seed: Optional[int] = None, epoch: int = 0) -> Iterator[Batch]:
    """
    Split ``dataset`` into mini-batches.

    The order is a permutation drawn from (shuffle_seed, epoch), so each
    epoch gets its own order and reruns repeat it. ``shuffle_seed=None``
    keeps dataset order. The last batch may be short.
    """
    if batch_size < 1:
        raise RangeError(f"batch_size must be at least 1, got {batch_size}")
    order = np.arange(len(dataset))
    if shuffle_seed is not None:
        order = np.random.default_rng([int(shuffle_seed), int(epoch)]).permutation(len(dataset))
    for start in range(0, len(dataset), batch_size):
        idx = order[start:start + batch_size]
        yield Batch(indices=idx, images=dataset.images[idx], labels=dataset.labels[idx])


def synthetic_two_class(n: int, rng_seed: int, side: int = 4, split: str = "train") -> Dataset:
    """
    Deterministic, linearly separable two-class set of ``side`` x ``side`` images.

    Class 0 lights the top row at intensity 1.0, class 1 the bottom row.
    Every other pixel is background noise: 0.1 with probability one half,
    otherwise 0. Labels alternate before a seeded shuffle so both classes
    are equally represented.
    """
    if n < 2:
        raise RangeError(f"synthetic dataset needs at least 2 samples, got {n}")
    if side < 2:
        raise RangeError(f"image side must be at least 2, got {side}")
    rng = np.random.default_rng(rng_seed)

    labels = rng.permutation(np.arange(n) % 2)
    images = np.where(rng.random((n, side, side)) < 0.5, 0.1, 0.0)
    images[labels == 0, 0, :] = 1.0
    images[labels == 1, side - 1, :] = 1.0
    return Dataset(images=images, labels=labels.astype(np.int64), split=split, num_classes=2)
