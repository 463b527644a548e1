"""Synthetic multi-coil phantom acquisitions.

A phantom is a sum of ellipses on the [-1, 1]^2 grid, given a smooth
polynomial phase field and weighted by simulated coil sensitivities. The
sensitivities are complex Gaussian bumps centered on a circle around the
image, normalized so the sum of squares over coils is exactly 1, which makes
the sum-of-squares image equal the phantom magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .containers import CoilImageStack, CoilSensitivities, KSpaceVolume
from .errors import ValidationError
from .fourier import fft2c

# Coil ring geometry, in normalized [-1, 1] image coordinates.
_COIL_RING_RADIUS = 1.35
_COIL_WIDTH = 1.1
_COIL_PHASE_SLOPE = 0.35


@dataclass(frozen=True)
class Ellipse:
    """One additive ellipse: center/axes in normalized coordinates."""

    center: tuple[float, float]
    axes: tuple[float, float]
    angle: float = 0.0
    intensity: float = 1.0


@dataclass(frozen=True)
class PhantomSpec:
    """Everything needed to build one multi-coil phantom acquisition."""

    shape: tuple[int, int]
    coils: int
    ellipses: tuple[Ellipse, ...]
    phase_coeffs: tuple[tuple[float, ...], ...] = ((0.0,),)
    noise_sigma: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        h, w = self.shape
        if h < 2 or w < 2:
            raise ValidationError(f"shape must have both sides >= 2, got {self.shape}")
        if self.coils < 1:
            raise ValidationError(f"coils must be positive, got {self.coils}")
        if self.noise_sigma < 0:
            raise ValidationError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not self.ellipses:
            raise ValidationError("ellipses must be nonempty")
        for i, e in enumerate(self.ellipses):
            if not (0.0 <= e.intensity <= 1.0):
                raise ValidationError(
                    f"ellipses[{i}].intensity must be in [0, 1], got {e.intensity}"
                )
            if e.axes[0] <= 0 or e.axes[1] <= 0:
                raise ValidationError(f"ellipses[{i}].axes must be positive, got {e.axes}")


def _unit_grid(h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    ys = np.linspace(-1.0, 1.0, h)
    xs = np.linspace(-1.0, 1.0, w)
    return np.meshgrid(ys, xs, indexing="ij")


def _render_magnitude(spec: PhantomSpec) -> np.ndarray:
    h, w = spec.shape
    yy, xx = _unit_grid(h, w)
    img = np.zeros((h, w), dtype=np.float64)
    for e in spec.ellipses:
        cy, cx = e.center
        ca, sa = np.cos(e.angle), np.sin(e.angle)
        u = (yy - cy) * ca + (xx - cx) * sa
        v = -(yy - cy) * sa + (xx - cx) * ca
        inside = (u / e.axes[0]) ** 2 + (v / e.axes[1]) ** 2 <= 1.0
        img += e.intensity * inside
    return img


def _render_phase(spec: PhantomSpec) -> np.ndarray:
    h, w = spec.shape
    yy, xx = _unit_grid(h, w)
    phase = np.zeros((h, w), dtype=np.float64)
    for i, row in enumerate(spec.phase_coeffs):
        for j, coeff in enumerate(row):
            if coeff != 0.0:
                phase += coeff * yy**i * xx**j
    return phase


def make_sensitivities(shape: tuple[int, int], coils: int) -> CoilSensitivities:
    """Gaussian coil bumps on a ring, normalized to unit SoS everywhere.

    Coil 0 has zero phase; coil k carries k times a fixed smooth phase ramp,
    so a single-coil setup stays purely real.
    """
    h, w = shape
    yy, xx = _unit_grid(h, w)
    mags = np.empty((coils, h, w), dtype=np.float64)
    for k in range(coils):
        theta = 2.0 * np.pi * k / coils
        cy = _COIL_RING_RADIUS * np.sin(theta)
        cx = _COIL_RING_RADIUS * np.cos(theta)
        mags[k] = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * _COIL_WIDTH**2))
    norm = np.sqrt(np.sum(mags**2, axis=0))
    mags /= norm
    ramp = _COIL_PHASE_SLOPE * (xx + 0.5 * yy)
    coil_idx = np.arange(coils, dtype=np.float64)[:, None, None]
    sens = mags * np.exp(1j * coil_idx * ramp)
    return CoilSensitivities(sens)


def generate_phantom(spec: PhantomSpec) -> tuple[CoilImageStack, CoilSensitivities]:
    """Build the ground-truth coil images and their sensitivity maps.

    Returns
    -------
    ground_truth : CoilImageStack
        Per coil, sensitivity * (magnitude phantom * exp(i * phase field)).
    sens : CoilSensitivities
        Unit-SoS maps, so sos(|ground_truth|) equals the phantom magnitude.
    """
    spec.validate()
    magnitude = _render_magnitude(spec)
    phase = _render_phase(spec)
    sens = make_sensitivities(spec.shape, spec.coils)
    complex_image = magnitude * np.exp(1j * phase)
    ground_truth = CoilImageStack(sens.data * complex_image[None, :, :])
    return ground_truth, sens


def simulate_acquisition(
    ground_truth: CoilImageStack, noise_sigma: float, seed: int = 0
) -> KSpaceVolume:
    """Fully-sampled noisy k-space: FFT of the coil images plus complex noise.

    Noise is i.i.d. complex Gaussian with total variance ``noise_sigma**2``
    per entry (each component gets variance ``noise_sigma**2 / 2``).
    """
    if noise_sigma < 0:
        raise ValidationError(f"noise_sigma must be >= 0, got {noise_sigma}")
    k = fft2c(ground_truth.data)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        scale = noise_sigma / np.sqrt(2.0)
        noise = rng.normal(0.0, scale, k.shape) + 1j * rng.normal(0.0, scale, k.shape)
        k = k + noise
    return KSpaceVolume(k)


def sos_combine(magnitudes: np.ndarray) -> np.ndarray:
    """Root-sum-of-squares over the coil axis of a [c, h, w] magnitude stack."""
    magnitudes = np.asarray(magnitudes, dtype=np.float64)
    if magnitudes.ndim != 3:
        raise ValidationError(f"expected [c, h, w] magnitudes, got shape {magnitudes.shape}")
    if np.any(magnitudes < 0):
        raise ValidationError("magnitudes must be nonnegative")
    if not np.all(np.isfinite(magnitudes)):
        raise ValidationError("magnitudes must be finite")
    return np.sqrt(np.sum(magnitudes**2, axis=0))


def random_phantom_spec(
    shape: tuple[int, int],
    coils: int,
    noise_sigma: float,
    rng: np.random.Generator,
) -> PhantomSpec:
    """Draw a random head-like spec: one body ellipse plus inner structures."""
    body = Ellipse(
        center=(rng.uniform(-0.08, 0.08), rng.uniform(-0.08, 0.08)),
        axes=(rng.uniform(0.62, 0.78), rng.uniform(0.5, 0.68)),
        angle=rng.uniform(-0.3, 0.3),
        intensity=rng.uniform(0.5, 0.7),
    )
    ellipses = [body]
    for _ in range(rng.integers(2, 5)):
        ellipses.append(
            Ellipse(
                center=(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)),
                axes=(rng.uniform(0.06, 0.3), rng.uniform(0.06, 0.3)),
                angle=rng.uniform(0, np.pi),
                intensity=rng.uniform(0.1, 0.3),
            )
        )
    phase_coeffs = tuple(
        tuple(rng.uniform(-0.5, 0.5) for _ in range(2)) for _ in range(2)
    )
    return PhantomSpec(
        shape=shape,
        coils=coils,
        ellipses=tuple(ellipses),
        phase_coeffs=phase_coeffs,
        noise_sigma=noise_sigma,
        seed=int(rng.integers(0, 2**31 - 1)),
    )
