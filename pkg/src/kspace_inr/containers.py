"""Array containers for multi-coil k-space and image-domain data.

All containers hold a complex array of shape [coils, h, w] and validate it on
construction. They are thin: operations unwrap ``.data`` immediately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, ValidationError


def _validate_coil_array(data: np.ndarray, name: str) -> np.ndarray:
    data = np.asarray(data)
    if data.ndim != 3:
        raise ShapeError(f"{name}.data must be [coils, h, w], got shape {data.shape}")
    c, h, w = data.shape
    if c < 1 or h < 2 or w < 2:
        raise ShapeError(
            f"{name}.data needs coils >= 1 and both spatial sides >= 2, got {data.shape}"
        )
    if not np.iscomplexobj(data):
        data = data.astype(np.complex128)
    if not np.all(np.isfinite(data.real)) or not np.all(np.isfinite(data.imag)):
        raise ValidationError(f"{name}.data contains non-finite entries")
    return data


@dataclass(frozen=True)
class KSpaceVolume:
    """Complex multi-coil frequency-domain samples, DC at (h//2, w//2)."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _validate_coil_array(self.data, "KSpaceVolume"))

    @property
    def coils(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple:
        return self.data.shape


@dataclass(frozen=True)
class CoilImageStack:
    """Complex multi-coil image-domain data with magnitude and phase views."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _validate_coil_array(self.data, "CoilImageStack"))

    @property
    def coils(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple:
        return self.data.shape

    def magnitude(self) -> np.ndarray:
        return np.abs(self.data)

    def phase(self) -> np.ndarray:
        """Elementwise argument in (-pi, pi]; exactly-zero voxels map to 0."""
        ang = np.angle(self.data)
        return np.where(np.abs(self.data) == 0, 0.0, ang)


@dataclass(frozen=True)
class CoilSensitivities:
    """Smooth complex coil sensitivity maps, unit sum-of-squares on support."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "data", _validate_coil_array(self.data, "CoilSensitivities")
        )

    @property
    def coils(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple:
        return self.data.shape
