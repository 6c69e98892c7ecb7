"""Image tensors, channel standardization, and the orthonormal 2-D DCT.

An image is a float array of shape (height, width, channels), row-major
with the channel axis last.  Standardized images have zero mean and unit
variance per channel with respect to dataset-level statistics, which is
the representation every other module assumes.

The DCT here is the orthonormal type-II transform applied separably along
height and width, per channel.  Orthonormal scaling makes the transform an
isometry: ``idct2d(dct2d(x)) == x`` up to roundoff and energy is preserved
(Parseval), which the blurring and spectral-analysis code relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.fft import dct, idct

from .errors import DataError

STD_FLOOR = 1e-8


def ensure_image(img: np.ndarray) -> np.ndarray:
    """Validate and return ``img`` as a float64 (H, W, C) array."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3:
        raise DataError(f"image must have shape (H, W, C), got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise DataError(f"image axes must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError("image contains non-finite values")
    return arr


@dataclass(frozen=True)
class ChannelStats:
    """Per-channel mean and strictly positive standard deviation."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        if mean.ndim != 1 or std.shape != mean.shape:
            raise DataError(
                f"mean/std must be matching 1-D vectors, got {mean.shape} and {std.shape}"
            )
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(std)):
            raise DataError("channel statistics must be finite")
        if not np.all(std > 0):
            raise DataError("channel std must be strictly positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @property
    def channels(self) -> int:
        return self.mean.shape[0]


def compute_channel_stats(dataset: Sequence[np.ndarray]) -> ChannelStats:
    """Two-pass per-channel mean and population std over all pixels.

    The std is floored at ``STD_FLOOR`` so constant channels stay usable.
    """
    if len(dataset) == 0:
        raise DataError("cannot compute channel statistics of an empty dataset")
    images = [ensure_image(img) for img in dataset]
    channels = images[0].shape[2]
    for i, img in enumerate(images):
        if img.shape[2] != channels:
            raise DataError(
                f"image {i} has {img.shape[2]} channels, expected {channels}"
            )
    count = sum(img.shape[0] * img.shape[1] for img in images)
    total = np.zeros(channels)
    for img in images:
        total += img.sum(axis=(0, 1))
    mean = total / count
    sq = np.zeros(channels)
    for img in images:
        sq += ((img - mean) ** 2).sum(axis=(0, 1))
    std = np.maximum(np.sqrt(sq / count), STD_FLOOR)
    return ChannelStats(mean=mean, std=std)


def _check_channels(img: np.ndarray, stats: ChannelStats) -> None:
    if img.shape[2] != stats.channels:
        raise DataError(
            f"image has {img.shape[2]} channels but stats describe {stats.channels}"
        )


def standardize(img: np.ndarray, stats: ChannelStats) -> np.ndarray:
    """Return ``(img - mean) / std`` per channel."""
    img = ensure_image(img)
    _check_channels(img, stats)
    return (img - stats.mean) / stats.std


def destandardize(img: np.ndarray, stats: ChannelStats) -> np.ndarray:
    """Inverse of :func:`standardize`: ``img * std + mean`` per channel."""
    img = ensure_image(img)
    _check_channels(img, stats)
    return img * stats.std + stats.mean


def dct2d(img: np.ndarray) -> np.ndarray:
    """Orthonormal type-II DCT along height then width, per channel."""
    img = ensure_image(img)
    out = dct(img, type=2, norm="ortho", axis=0)
    return dct(out, type=2, norm="ortho", axis=1)


def idct2d(grid: np.ndarray) -> np.ndarray:
    """Exact inverse of :func:`dct2d` up to floating-point roundoff."""
    grid = ensure_image(grid)
    out = idct(grid, type=2, norm="ortho", axis=1)
    return idct(out, type=2, norm="ortho", axis=0)
