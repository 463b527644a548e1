"""Centered, orthonormal 2D FFT used everywhere k-space meets image space.

Convention: the DC component sits at grid index (h // 2, w // 2) and both
directions carry the 1/sqrt(h*w) scaling, so the transform is unitary and
Parseval holds exactly. The numpy pair operates on the trailing two axes of
ndarrays; the torch pair is identical but differentiable.
"""

from __future__ import annotations

import numpy as np
import torch

_AXES = (-2, -1)


def fft2c(x: np.ndarray) -> np.ndarray:
    """Image -> k-space over the last two axes (DC centered, orthonormal)."""
    shifted = np.fft.ifftshift(x, axes=_AXES)
    k = np.fft.fft2(shifted, axes=_AXES, norm="ortho")
    return np.fft.fftshift(k, axes=_AXES)


def ifft2c(k: np.ndarray) -> np.ndarray:
    """K-space -> image over the last two axes (inverse of :func:`fft2c`)."""
    shifted = np.fft.ifftshift(k, axes=_AXES)
    x = np.fft.ifft2(shifted, axes=_AXES, norm="ortho")
    return np.fft.fftshift(x, axes=_AXES)


def fft2c_t(x: torch.Tensor) -> torch.Tensor:
    """Torch counterpart of :func:`fft2c` (differentiable)."""
    shifted = torch.fft.ifftshift(x, dim=_AXES)
    k = torch.fft.fft2(shifted, dim=_AXES, norm="ortho")
    return torch.fft.fftshift(k, dim=_AXES)


def ifft2c_t(k: torch.Tensor) -> torch.Tensor:
    """Torch counterpart of :func:`ifft2c` (differentiable)."""
    shifted = torch.fft.ifftshift(k, dim=_AXES)
    x = torch.fft.ifft2(shifted, dim=_AXES, norm="ortho")
    return torch.fft.fftshift(x, dim=_AXES)
