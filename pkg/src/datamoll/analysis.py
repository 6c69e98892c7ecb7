"""Corruption transforms, the compression information curve, and spectral
summaries of corruptions.

The information curve measures how much losslessly compressible content a
blur level leaves in a dataset: blur every image at temperature t,
de-standardize, quantize to 8 bits, PNG-encode, and take the mean byte-size
ratio against the t = 0 encoding.  Spectral deltas summarize a corruption by
the mean absolute change it causes per DCT coefficient, optionally reduced
to radial-frequency annuli.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .mollifier import blur_image, heat_blur
from .png import png_size
from .schedules import ScheduleConfig, blur_sigma
from .tensors import ChannelStats, dct2d, destandardize, ensure_image

CORRUPTION_KINDS = ("gauss_noise", "gauss_blur", "contrast", "pixelate")

_NOISE_SIGMAS = (0.1, 0.2, 0.4, 0.6, 0.8)
_BLUR_SIGMAS = (0.5, 1.0, 2.0, 4.0, 8.0)
_CONTRAST_FACTORS = (0.8, 0.6, 0.4, 0.3, 0.2)
_PIXELATE_BLOCKS = (2, 3, 4, 5, 6)


def _severity_index(severity: int) -> int:
    if not isinstance(severity, (int, np.integer)) or not 1 <= int(severity) <= 5:
        raise ValueError(f"severity must be an integer in 1..5, got {severity!r}")
    return int(severity) - 1


def _pixelate(img: np.ndarray, block: int) -> np.ndarray:
    out = np.empty_like(img)
    h, w = img.shape[0], img.shape[1]
    for i0 in range(0, h, block):
        i1 = min(i0 + block, h)
        for j0 in range(0, w, block):
            j1 = min(j0 + block, w)
            out[i0:i1, j0:j1] = img[i0:i1, j0:j1].mean(axis=(0, 1))
    return out


def corrupt(
    img: np.ndarray,
    kind: str,
    severity: int,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Apply one of the built-in test-time corruptions at severity 1..5.

    Corruptions act on standardized images; ``gauss_noise`` needs ``rng``.
    """
    img = ensure_image(img)
    idx = _severity_index(severity)
    if kind == "gauss_noise":
        if rng is None:
            raise ValueError("gauss_noise requires a random generator")
        return img + _NOISE_SIGMAS[idx] * rng.standard_normal(img.shape)
    if kind == "gauss_blur":
        sigma = min(_BLUR_SIGMAS[idx], float(img.shape[1]))
        return heat_blur(img, 0.5 * sigma * sigma)
    if kind == "contrast":
        mean = img.mean(axis=(0, 1))
        return mean + _CONTRAST_FACTORS[idx] * (img - mean)
    if kind == "pixelate":
        return _pixelate(img, _PIXELATE_BLOCKS[idx])
    raise ValueError(f"unknown corruption kind {kind!r}; expected one of {CORRUPTION_KINDS}")


def corruption_grid(images: Sequence[np.ndarray], seed: int):
    """Yield ``(tag, corrupted stack)`` over all kinds and severities 1..5.

    Randomness is keyed by (seed, kind index, severity), so any single cell
    can be regenerated without the others.
    """
    from .streams import stream

    for kind_idx, kind in enumerate(CORRUPTION_KINDS):
        for severity in range(1, 6):
            rng = stream(seed, kind_idx, severity)
            batch = np.stack([corrupt(img, kind, severity, rng) for img in images])
            yield f"{kind}-{severity}", batch


@dataclass(frozen=True)
class InfoCurvePoint:
    """Mean PNG byte-size ratio of blurred images at one temperature."""

    t: float
    sigma_b: float
    mean_ratio: float


def quantize_for_png(img: np.ndarray, stats: ChannelStats) -> np.ndarray:
    """De-standardize, clamp to [0, 1], and quantize to 8-bit pixels."""
    raw = np.clip(destandardize(img, stats), 0.0, 1.0)
    return np.round(raw * 255.0).astype(np.uint8)


def info_curve(
    images: Sequence[np.ndarray],
    stats: ChannelStats,
    cfg: ScheduleConfig,
    t_grid: Sequence[float],
) -> list[InfoCurvePoint]:
    """PNG size ratios over a temperature grid (which must contain t = 0).

    The baseline size of each image is its own encoding at t = 0; since the
    schedule blurs at sigma_min even there, the curve starts at exactly 1.
    """
    if len(images) == 0:
        raise DataError("info_curve needs a non-empty dataset")
    grid = [float(t) for t in t_grid]
    if 0.0 not in grid:
        raise DataError("the temperature grid must contain t = 0")
    if images[0].shape[2] not in (1, 3):
        raise DataError("PNG encoding supports 1- or 3-channel images only")

    def sizes_at(t: float) -> np.ndarray:
        out = np.empty(len(images))
        for i, img in enumerate(images):
            try:
                out[i] = png_size(quantize_for_png(blur_image(img, t, cfg), stats))
            except Exception as exc:  # pragma: no cover - defensive re-raise
                raise DataError(f"PNG encoding failed for image {i} at t={t}: {exc}") from exc
        return out

    base = sizes_at(0.0)
    points = []
    for t in grid:
        sizes = base if t == 0.0 else sizes_at(t)
        points.append(
            InfoCurvePoint(t=t, sigma_b=blur_sigma(t, cfg), mean_ratio=float((sizes / base).mean()))
        )
    return points


@dataclass(frozen=True)
class SpectralDelta:
    """Mean absolute DCT-coefficient change caused by a corruption."""

    grid: np.ndarray  # (H, W), channel-averaged, all entries >= 0
    tag: str = ""


def spectral_delta(
    clean: Sequence[np.ndarray], corrupted: Sequence[np.ndarray], tag: str = ""
) -> SpectralDelta:
    """Elementwise mean |DCT(corrupted) - DCT(clean)| over images and channels."""
    if len(clean) == 0 or len(clean) != len(corrupted):
        raise DataError(
            f"need equal-length non-empty sequences, got {len(clean)} and {len(corrupted)}"
        )
    first = ensure_image(clean[0])
    acc = np.zeros(first.shape[:2])
    for i, (a, b) in enumerate(zip(clean, corrupted)):
        a = ensure_image(a)
        b = ensure_image(b)
        if a.shape != first.shape or b.shape != first.shape:
            raise DataError(f"image {i} shape mismatch: {a.shape} vs {b.shape}")
        acc += np.abs(dct2d(b) - dct2d(a)).mean(axis=2)
    return SpectralDelta(grid=acc / len(clean), tag=tag)


def radial_frequencies(height: int, width: int) -> np.ndarray:
    """Normalized radial frequency sqrt((w/W)^2 + (h/H)^2) per coefficient."""
    fh = np.arange(height) / height
    fw = np.arange(width) / width
    return np.sqrt(fh[:, None] ** 2 + fw[None, :] ** 2)


def annulus_means(grid: np.ndarray, num_bands: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Mean grid value per radial-frequency band, DC excluded.

    Returns (band centers, band means); bands are equal-width in normalized
    radial frequency up to the largest frequency present.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2:
        raise DataError(f"expected a 2-D grid, got shape {grid.shape}")
    radius = radial_frequencies(*grid.shape)
    mask = ~((np.arange(grid.shape[0])[:, None] == 0) & (np.arange(grid.shape[1])[None, :] == 0))
    r = radius[mask]
    v = grid[mask]
    edges = np.linspace(0.0, float(r.max()), num_bands + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    means = np.full(num_bands, np.nan)
    band = np.minimum(np.searchsorted(edges[1:], r, side="left"), num_bands - 1)
    for b in range(num_bands):
        members = band == b
        if members.any():
            means[b] = v[members].mean()
    return centers, means


def exp_decay_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares fit of log(y) = a + rate*x; returns (rate, R^2).

    All ``y`` must be positive; R^2 is computed on the log scale.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.size < 3:
        raise ValueError("need matching vectors with at least 3 points")
    if np.any(y <= 0):
        raise ValueError("y values must be positive for a log-linear fit")
    logy = np.log(y)
    design = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(design, logy, rcond=None)
    resid = logy - design @ coef
    total = logy - logy.mean()
    ss_tot = float(total @ total)
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(resid @ resid) / ss_tot
    return float(coef[1]), r2


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson correlation coefficient of two equal-length vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need matching vectors with at least 2 points")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0:
        raise ValueError("correlation undefined for constant input")
    return float(xc @ yc) / denom
