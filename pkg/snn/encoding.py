"""Rate encoding of normalised images into Bernoulli spike trains."""

from typing import Sequence

import numpy as np

from .errors import RangeError


def bernoulli_encode(image: np.ndarray, T: int, rng_seed: int) -> np.ndarray:
    """
    Draw an independent spike per pixel per timestep with probability equal
    to the pixel intensity.

    Args:
        image: intensities in [0, 1], any shape
        T: number of timesteps
        rng_seed: seed; identical seeds give identical trains

    Returns:
        np.ndarray: binary array of shape (T, *image.shape)
    """
    image = np.asarray(image, dtype=float)
    if T < 1:
        raise RangeError(f"T must be at least 1, got {T}")
    if image.size and (np.nanmin(image) < 0.0 or np.nanmax(image) > 1.0 or np.isnan(image).any()):
        raise RangeError("pixel intensities must lie in [0, 1]")
    rng = np.random.default_rng(rng_seed)
    return (rng.random((T,) + image.shape) < image).astype(float)


def encode_batch(images: np.ndarray, T: int, seeds: Sequence[int]) -> np.ndarray:
    """Encode a batch of images, one seed per image; returns (T, batch, *image_shape)."""
    images = np.asarray(images, dtype=float)
    if len(seeds) != images.shape[0]:
        raise RangeError(f"got {len(seeds)} seeds for {images.shape[0]} images")
    trains = [bernoulli_encode(image, T, int(seed)) for image, seed in zip(images, seeds)]
    return np.stack(trains, axis=1)
