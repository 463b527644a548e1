"""K-space rendering from predicted magnitudes/phases and the training loss.

The torch variants are differentiable and used by the training loop; the
numpy-facing functions implement the same convention (centered orthonormal
FFT, complex L1 as |Re| + |Im| with mean reduction) for data-side callers.
"""

from __future__ import annotations

import numpy as np
import torch

from .containers import KSpaceVolume
from .errors import ShapeError, ValidationError
from .fourier import fft2c, fft2c_t


def render_kspace(intensities: np.ndarray, phases: np.ndarray) -> KSpaceVolume:
    """FFT of intensities * exp(i * phases), per coil."""
    intensities = np.asarray(intensities, dtype=np.float64)
    phases = np.asarray(phases, dtype=np.float64)
    if intensities.shape != phases.shape:
        raise ShapeError(
            f"intensities shape {intensities.shape} != phases shape {phases.shape}"
        )
    if intensities.ndim != 3:
        raise ShapeError(f"expected [c, h, w] inputs, got shape {intensities.shape}")
    if not (np.all(np.isfinite(intensities)) and np.all(np.isfinite(phases))):
        raise ValidationError("render_kspace inputs must be finite")
    z = intensities * np.exp(1j * phases)
    return KSpaceVolume(fft2c(z))


def render_kspace_t(intensities: torch.Tensor, phases: torch.Tensor) -> torch.Tensor:
    """Differentiable rendering for [..., h, w] real tensors."""
    z = torch.complex(intensities * torch.cos(phases), intensities * torch.sin(phases))
    return fft2c_t(z)


def kspace_l1_loss(k_pred: KSpaceVolume, k_ref: KSpaceVolume) -> float:
    """Mean over all entries of |Re(diff)| + |Im(diff)|."""
    if k_pred.shape != k_ref.shape:
        raise ShapeError(f"k-space shapes differ: {k_pred.shape} vs {k_ref.shape}")
    diff = k_pred.data - k_ref.data
    return float(np.mean(np.abs(diff.real) + np.abs(diff.imag)))


def kspace_l1_t(k_pred: torch.Tensor, k_ref: torch.Tensor) -> torch.Tensor:
    """Differentiable counterpart of :func:`kspace_l1_loss`."""
    if k_pred.shape != k_ref.shape:
        raise ShapeError(
            f"k-space shapes differ: {tuple(k_pred.shape)} vs {tuple(k_ref.shape)}"
        )
    diff = k_pred - k_ref
    return (diff.real.abs() + diff.imag.abs()).mean()
