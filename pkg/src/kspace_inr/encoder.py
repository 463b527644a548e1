"""Scale-conditioned convolutional encoder producing voxel-specific features.

The encoder compresses the stack of per-coil zero-filled magnitudes into a
feature grid shared by the coordinate MLP. Five residual blocks of 5x5
convolutions (64 channels, group normalization, Swish) are conditioned on the
acceleration scale through a learned linear projection added as a per-channel
bias inside each block; a final 1x1 convolution projects to the feature
dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .errors import ShapeError, ValidationError

KERNEL_SIZE = 5
SCALE_REF = 4.0


def scale_feature(scale: float) -> float:
    """Scalar conditioning input fed to the scale projections: s / 4."""
    return float(scale) / SCALE_REF


@dataclass(frozen=True)
class FeatureMap:
    """Real voxel-specific feature grid of shape [h, w, d]."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3:
            raise ShapeError(f"FeatureMap.data must be [h, w, d], got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValidationError("FeatureMap.data contains non-finite entries")
        object.__setattr__(self, "data", data)

    @property
    def feature_dim(self) -> int:
        return self.data.shape[2]


def _fan_in_uniform_(tensor: torch.Tensor, fan_in: int, generator: torch.Generator) -> None:
    bound = 1.0 / float(np.sqrt(fan_in))
    with torch.no_grad():
        tensor.uniform_(-bound, bound, generator=generator)


def _init_conv(conv: nn.Conv2d, generator: torch.Generator) -> None:
    fan_in = conv.in_channels * conv.kernel_size[0] * conv.kernel_size[1]
    _fan_in_uniform_(conv.weight, fan_in, generator)
    with torch.no_grad():
        conv.bias.zero_()


class ResidualBlock(nn.Module):
    """conv -> GN -> Swish -> (+ scale bias) -> conv -> GN -> (+ skip) -> Swish."""

    def __init__(
        self,
        channels: int,
        groups: int,
        scale_embedding: bool,
        dtype: torch.dtype = torch.float32,
    ):
        super().__init__()
        pad = KERNEL_SIZE // 2
        self.conv1 = nn.Conv2d(channels, channels, KERNEL_SIZE, padding=pad, dtype=dtype)
        self.norm1 = nn.GroupNorm(groups, channels, eps=1e-5, dtype=dtype)
        self.scale_proj = nn.Linear(1, channels, dtype=dtype) if scale_embedding else None
        self.conv2 = nn.Conv2d(channels, channels, KERNEL_SIZE, padding=pad, dtype=dtype)
        self.norm2 = nn.GroupNorm(groups, channels, eps=1e-5, dtype=dtype)

    def forward(self, x: torch.Tensor, scale_feat: torch.Tensor) -> torch.Tensor:
        h = F.silu(self.norm1(self.conv1(x)))
        if self.scale_proj is not None:
            h = h + self.scale_proj(scale_feat)[:, :, None, None]
        h = self.norm2(self.conv2(h))
        return F.silu(h + x)

    def scale_bias(self, scale: float) -> np.ndarray:
        """Per-channel bias this block adds for a given acceleration scale."""
        if scale < 1:
            raise ValidationError(f"scale must be >= 1, got {scale}")
        if self.scale_proj is None:
            return np.zeros(self.conv1.out_channels)
        feat = torch.tensor([[scale_feature(scale)]], dtype=self.conv1.weight.dtype)
        with torch.no_grad():
            return self.scale_proj(feat)[0].numpy().copy()

    def reset_parameters(self, generator: torch.Generator) -> None:
        _init_conv(self.conv1, generator)
        with torch.no_grad():
            self.norm1.weight.fill_(1.0)
            self.norm1.bias.zero_()
        if self.scale_proj is not None:
            with torch.no_grad():
                self.scale_proj.weight.normal_(0.0, 0.02, generator=generator)
                self.scale_proj.bias.zero_()
        _init_conv(self.conv2, generator)
        with torch.no_grad():
            self.norm2.weight.fill_(1.0)
            self.norm2.bias.zero_()


class ScaleEmbeddedEncoder(nn.Module):
    """Input projection, five residual blocks, 1x1 projection to ``feature_dim``."""

    def __init__(
        self,
        coils: int,
        channels: int = 64,
        blocks: int = 5,
        feature_dim: int = 128,
        groups: int = 8,
        scale_embedding: bool = True,
        dtype: torch.dtype = torch.float32,
    ):
        super().__init__()
        if coils < 1:
            raise ValidationError(f"coils must be >= 1, got {coils}")
        self.coils = coils
        self.feature_dim = feature_dim
        pad = KERNEL_SIZE // 2
        self.input_proj = nn.Conv2d(coils, channels, KERNEL_SIZE, padding=pad, dtype=dtype)
        self.blocks = nn.ModuleList(
            ResidualBlock(channels, groups, scale_embedding, dtype) for _ in range(blocks)
        )
        self.output_proj = nn.Conv2d(channels, feature_dim, 1, dtype=dtype)

    def forward(self, x: torch.Tensor, scale_feat: torch.Tensor) -> torch.Tensor:
        """[B, c, h, w] magnitudes + [B, 1] scale features -> [B, d, h, w]."""
        if x.shape[1] != self.coils:
            raise ShapeError(f"expected {self.coils} input channels, got {x.shape[1]}")
        h = self.input_proj(x)
        for block in self.blocks:
            h = block(h, scale_feat)
        return self.output_proj(h)

    def encode(self, zero_filled_magnitudes: np.ndarray, scale: int) -> FeatureMap:
        """Single-stack convenience wrapper returning an [h, w, d] feature grid."""
        mags = np.asarray(zero_filled_magnitudes)
        if mags.ndim != 3:
            raise ShapeError(f"expected [c, h, w] magnitudes, got shape {mags.shape}")
        if mags.shape[0] != self.coils:
            raise ShapeError(f"expected {self.coils} coils, got {mags.shape[0]}")
        if scale < 1:
            raise ValidationError(f"scale must be >= 1, got {scale}")
        dtype = self.input_proj.weight.dtype
        x = torch.as_tensor(mags, dtype=dtype)[None]
        s = torch.tensor([[scale_feature(scale)]], dtype=dtype)
        with torch.no_grad():
            feats = self.forward(x, s)[0]
        return FeatureMap(feats.permute(1, 2, 0).numpy().copy())

    def reset_parameters(self, generator: torch.Generator) -> None:
        _init_conv(self.input_proj, generator)
        for block in self.blocks:
            block.reset_parameters(generator)
        _init_conv(self.output_proj, generator)
