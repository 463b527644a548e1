"""GRAPPA and zero-fill reference reconstructions.

GRAPPA fills each missing phase-encoding line as a learned linear combination
of its sampled neighbors: for a missing line at offset r from the previous
sampled line, the sources are the two sampled lines on each side combined
with 5 adjacent read-direction samples across all coils. Weights are fit by
regularized least squares on the fully sampled ACS block. The read direction
wraps circularly; targets whose source lines fall off the phase-encoding
edges are skipped and stay zero-filled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .containers import KSpaceVolume
from .errors import CalibrationError, ShapeError, ValidationError
from .fourier import ifft2c
from .phantom import sos_combine
from .sampling import SamplingMask


@dataclass(frozen=True)
class GrappaKernelSpec:
    """Kernel geometry: sampled lines per side, read taps, Tikhonov factor."""

    lines_each_side: int = 2
    read_taps: int = 5
    tikhonov: float = 1e-6

    @property
    def n_line_taps(self) -> int:
        return 2 * self.lines_each_side

    def line_offsets(self, scale: int, r: int) -> np.ndarray:
        above = [-r - k * scale for k in range(self.lines_each_side - 1, -1, -1)]
        below = [(k + 1) * scale - r for k in range(self.lines_each_side)]
        return np.array(above + below)

    def read_offsets(self) -> np.ndarray:
        half = self.read_taps // 2
        return np.arange(-half, self.read_taps - half)


@dataclass
class GrappaWeights:
    scale: int
    coils: int
    geometry: GrappaKernelSpec
    weights: dict[int, np.ndarray] = field(default_factory=dict)


def _source_matrix(
    block: np.ndarray, geometry: GrappaKernelSpec
) -> np.ndarray:
    """[c, n, taps, read] -> [n * read, c * taps * read_taps] feature rows.

    Feature ordering is (coil, line tap, read tap); the fill path must match.
    """
    rolled = np.stack(
        [np.roll(block, -dy, axis=-1) for dy in geometry.read_offsets()], axis=3
    )  # [c, n, taps, n_dy, read]
    c, n, taps, n_dy, read = rolled.shape
    rows = rolled.transpose(1, 4, 0, 2, 3).reshape(n * read, c * taps * n_dy)
    return rows


def grappa_calibrate(
    acs_kspace: np.ndarray,
    geometry: GrappaKernelSpec = GrappaKernelSpec(),
    scale: int = 2,
) -> GrappaWeights:
    """Fit per-offset interpolation weights on the ACS block.

    Parameters
    ----------
    acs_kspace : complex [c, n_acs, n_read]
        The fully sampled central block, lines on axis 1.
    scale : int
        Acceleration factor the weights will be used for.
    """
    acs = np.asarray(acs_kspace)
    if acs.ndim != 3:
        raise ShapeError(f"acs_kspace must be [c, n_acs, n_read], got {acs.shape}")
    if scale < 1:
        raise ValidationError(f"scale must be >= 1, got {scale}")
    c, n_acs, n_read = acs.shape
    out = GrappaWeights(scale=scale, coils=c, geometry=geometry)
    if scale == 1:
        return out
    for r in range(1, scale):
        offs = geometry.line_offsets(scale, r)
        t_min = int(-offs.min())
        t_max = n_acs - int(offs.max())
        n_targets = t_max - t_min
        n_feat = c * geometry.n_line_taps * geometry.read_taps
        n_eq = max(n_targets, 0) * n_read
        if n_eq < 4 * n_feat:
            raise CalibrationError(
                f"ACS too small for scale {scale}, offset {r}: {n_eq} equations "
                f"for {n_feat} unknowns (need >= {4 * n_feat})"
            )
        targets = np.arange(t_min, t_max)
        block = acs[:, targets[:, None] + offs[None, :], :]  # [c, n_t, taps, read]
        a = _source_matrix(block, geometry)
        b = acs[:, targets, :].transpose(1, 2, 0).reshape(n_eq, c)
        gram = a.conj().T @ a
        lam = geometry.tikhonov * float(np.mean(np.diag(gram).real))
        w = np.linalg.solve(gram + lam * np.eye(n_feat), a.conj().T @ b)
        out.weights[r] = w
    return out


def fillable_columns(width: int, mask: SamplingMask, geometry: GrappaKernelSpec = GrappaKernelSpec()) -> np.ndarray:
    """Missing columns whose full source pattern lies inside the grid."""
    scale = mask.scale
    cols = []
    for t in range(width):
        if mask.line_selector[t]:
            continue
        r = t % scale
        offs = geometry.line_offsets(scale, r)
        src = t + offs
        if src.min() >= 0 and src.max() < width:
            cols.append(t)
    return np.array(cols, dtype=int)


def grappa_fill(
    k_undersampled: KSpaceVolume, mask: SamplingMask, weights: GrappaWeights
) -> KSpaceVolume:
    """Fill missing lines with the calibrated kernel; sampled lines copy bitwise."""
    if mask.scale != weights.scale:
        raise ValidationError(
            f"weights were calibrated for scale {weights.scale}, mask has {mask.scale}"
        )
    if k_undersampled.coils != weights.coils:
        raise ValidationError(
            f"weights expect {weights.coils} coils, k-space has {k_undersampled.coils}"
        )
    if mask.width != k_undersampled.shape[2]:
        raise ShapeError(
            f"mask width {mask.width} != k-space width {k_undersampled.shape[2]}"
        )
    geometry = weights.geometry
    data = k_undersampled.data.copy()
    w = mask.width
    for t in range(w):
        if mask.line_selector[t]:
            continue
        r = t % mask.scale
        if r == 0:
            raise ValidationError(
                f"column {t} is unselected but congruent to the sampled grid; "
                "mask does not match an equispaced pattern"
            )
        src = t + geometry.line_offsets(mask.scale, r)
        if src.min() < 0 or src.max() >= w:
            continue  # incomplete source pattern at the edge: stays zero
        block = data[:, :, src].transpose(0, 2, 1)[:, None]  # [c, 1, taps, read(h)]
        rows = _source_matrix(block, geometry)  # [h, n_feat]
        data[:, :, t] = (rows @ weights.weights[r]).T
    return KSpaceVolume(data)


def grappa_reconstruct(
    k_undersampled: KSpaceVolume, mask: SamplingMask, weights: GrappaWeights
) -> np.ndarray:
    """Filled k-space -> per-coil inverse FFT -> sum-of-squares image."""
    filled = grappa_fill(k_undersampled, mask, weights)
    return sos_combine(np.abs(ifft2c(filled.data)))


def zero_fill_baseline(k_undersampled: KSpaceVolume) -> np.ndarray:
    """Sum-of-squares of the zero-filled coil images."""
    return sos_combine(np.abs(ifft2c(k_undersampled.data)))
