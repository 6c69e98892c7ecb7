"""Input mollification: schedule-driven noising and heat-equation blurring.

Noising mixes a standardized image with unit Gaussian noise in
variance-preserving proportions.  Blurring evolves the image under the
heat equation, realized as exponential attenuation of DCT coefficients;
the DC coefficient is untouched, so blurring never shifts channel means.
Batch mollification picks one transform (or none) per image, draws the
temperature from the Beta prior, and attaches the matching label-decay
weight.  All per-image randomness derives from (seed, image index), so
outcomes do not depend on processing order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .schedules import (
    ScheduleConfig,
    alpha_sigma,
    blur_sigma,
    dissipation_time,
    gamma_blur,
    gamma_noise,
    sample_temperature,
)
from .streams import derive_seed, stream
from .tensors import dct2d, ensure_image, idct2d


class Mode(Enum):
    NONE = "none"
    NOISE = "noise"
    BLUR = "blur"


@dataclass(frozen=True)
class MollificationParams:
    """The per-image transformation draw: mode, temperature, noise seed."""

    mode: Mode
    t: float
    noise_seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"temperature must lie in [0, 1], got {self.t}")


@dataclass(frozen=True)
class MollifiedExample:
    """A transformed image together with its label-decay weight."""

    image: np.ndarray
    gamma: float
    params: MollificationParams


def noise_image(img: np.ndarray, t: float, rng: np.random.Generator) -> np.ndarray:
    """Mix ``img`` with unit Gaussian noise: alpha*img + sigma*eps."""
    img = ensure_image(img)
    alpha, sigma = alpha_sigma(t)
    eps = rng.standard_normal(img.shape)
    return alpha * img + sigma * eps


def heat_multipliers(height: int, width: int, tau: float) -> np.ndarray:
    """Per-frequency attenuation exp(-tau * pi^2 (w^2/W^2 + h^2/H^2))."""
    if tau < 0:
        raise ValueError(f"dissipation time must be non-negative, got {tau}")
    fh = (np.arange(height) / height) ** 2
    fw = (np.arange(width) / width) ** 2
    lam = (math.pi**2) * (fh[:, None] + fw[None, :])
    return np.exp(-tau * lam)


def heat_blur(img: np.ndarray, tau: float) -> np.ndarray:
    """Evolve ``img`` under the heat equation for time ``tau`` (pixels^2)."""
    img = ensure_image(img)
    if tau == 0.0:
        return img.copy()
    mult = heat_multipliers(img.shape[0], img.shape[1], tau)
    return idct2d(dct2d(img) * mult[:, :, None])


def blur_image(img: np.ndarray, t: float, cfg: ScheduleConfig) -> np.ndarray:
    """Blur at the schedule's kernel scale for temperature ``t``."""
    return heat_blur(img, dissipation_time(blur_sigma(t, cfg)))


# Tags for deriving independent per-image sub-streams.
_TAG_DECISION = 0
_TAG_NOISE = 1


def mollify_batch(
    imgs: Sequence[np.ndarray], cfg: ScheduleConfig, seed: int
) -> list[MollifiedExample]:
    """Independently mollify each image of a batch.

    For image ``i`` the mode and temperature come from the stream keyed by
    ``(seed, i)``; the Gaussian noise comes from a stream keyed by the
    recorded ``noise_seed``, so ``noise_image(img, t, stream(noise_seed))``
    reproduces the stored output.  Identity-mode outputs alias the input
    array (they are bit-identical, not copies).
    """
    out: list[MollifiedExample] = []
    p_none, p_noise, _ = cfg.mode_probs
    for idx, img in enumerate(imgs):
        decision = stream(seed, idx, _TAG_DECISION)
        u = decision.random()
        if u < p_none:
            params = MollificationParams(Mode.NONE, 0.0, 0)
            out.append(MollifiedExample(np.asarray(img, dtype=np.float64), 0.0, params))
            continue
        t = sample_temperature(decision, cfg)
        if u < p_none + p_noise:
            noise_seed = derive_seed(seed, idx, _TAG_NOISE)
            image = noise_image(img, t, stream(noise_seed))
            gamma = gamma_noise(t, cfg.k_noise)
            params = MollificationParams(Mode.NOISE, t, noise_seed)
        else:
            image = blur_image(img, t, cfg)
            gamma = gamma_blur(t, cfg.k_blur)
            params = MollificationParams(Mode.BLUR, t, 0)
        out.append(MollifiedExample(image, gamma, params))
    return out
