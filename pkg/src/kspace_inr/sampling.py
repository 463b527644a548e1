"""Equispaced phase-encoding undersampling with a centered ACS block.

Lines are indexed along the last (w) axis. A mask keeps every ``scale``-th
line by global index, unioned with a contiguous auto-calibration block of
``round(acs_fraction * width)`` central lines. All coils share one mask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .containers import CoilImageStack, CoilSensitivities, KSpaceVolume
from .errors import ShapeError, ValidationError
from .fourier import fft2c, ifft2c


@dataclass(frozen=True)
class SamplingMask:
    line_selector: np.ndarray
    scale: int
    acs_fraction: float
    acs_range: tuple[int, int]

    @property
    def width(self) -> int:
        return self.line_selector.shape[0]

    @property
    def n_selected(self) -> int:
        return int(np.count_nonzero(self.line_selector))


def acs_bounds(width: int, acs_fraction: float) -> tuple[int, int]:
    """Centered [start, end) of the ACS block; size rounds half up."""
    n_acs = int(math.floor(acs_fraction * width + 0.5))
    start = (width - n_acs) // 2
    return start, start + n_acs


def make_equispaced_mask(width: int, scale: int, acs_fraction: float) -> SamplingMask:
    """Build the deterministic equispaced mask for one acceleration scale."""
    if width < 2:
        raise ValidationError(f"width must be >= 2, got {width}")
    if scale < 1:
        raise ValidationError(f"scale must be >= 1, got {scale}")
    if not (0.0 < acs_fraction < 1.0):
        raise ValidationError(f"acs_fraction must be in (0, 1), got {acs_fraction}")
    start, end = acs_bounds(width, acs_fraction)
    if end - start < 1:
        raise ValidationError(
            f"acs_fraction {acs_fraction} rounds to an empty ACS block for width {width}"
        )
    idx = np.arange(width)
    selector = (idx % scale == 0) | ((idx >= start) & (idx < end))
    return SamplingMask(
        line_selector=selector,
        scale=scale,
        acs_fraction=acs_fraction,
        acs_range=(start, end),
    )


def apply_mask(k: KSpaceVolume, mask: SamplingMask) -> KSpaceVolume:
    """Zero out unselected phase-encoding lines; selected lines copy bitwise."""
    if mask.width != k.shape[2]:
        raise ShapeError(f"mask width {mask.width} != k-space width {k.shape[2]}")
    data = np.where(mask.line_selector[None, None, :], k.data, 0.0 + 0.0j)
    return KSpaceVolume(data)


def zero_filled_images(k_undersampled: KSpaceVolume) -> CoilImageStack:
    """Per-coil centered inverse FFT of (possibly zero-filled) k-space."""
    return CoilImageStack(ifft2c(k_undersampled.data))


def degrade(
    image: np.ndarray | CoilImageStack,
    sens: CoilSensitivities,
    mask: SamplingMask,
) -> KSpaceVolume:
    """Noiseless forward model: per coil, mask(FFT(sensitivity * image)).

    ``image`` is either a single complex [h, w] image, or a [c, h, w] stack
    that is multiplied with the sensitivities coil by coil.
    """
    img = image.data if isinstance(image, CoilImageStack) else np.asarray(image)
    if img.ndim == 2:
        if img.shape != sens.shape[1:]:
            raise ShapeError(f"image shape {img.shape} != sensitivity grid {sens.shape[1:]}")
        coil_images = sens.data * img[None, :, :]
    elif img.ndim == 3:
        if img.shape != sens.shape:
            raise ShapeError(f"image stack shape {img.shape} != sensitivities {sens.shape}")
        coil_images = sens.data * img
    else:
        raise ShapeError(f"image must be [h, w] or [c, h, w], got shape {img.shape}")
    return apply_mask(KSpaceVolume(fft2c(coil_images)), mask)
