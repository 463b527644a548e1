"""Full reconstruction model: encoder + positional encoding + coordinate MLP."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn

from .encoder import ScaleEmbeddedEncoder, scale_feature
from .errors import ShapeError
from .field import PositionalEncoder, ReconField, make_grid

_DTYPES = {"float32": torch.float32, "float64": torch.float64}


@dataclass(frozen=True)
class ModelConfig:
    coils: int
    enc_channels: int = 64
    enc_blocks: int = 5
    gn_groups: int = 8
    feature_dim: int = 128
    pe_features: int = 128
    pe_sigma: float = 1.0
    hidden: int = 256
    positional_encoding: bool = True
    scale_embedding: bool = True
    phase_prediction: bool = True
    seed: int = 0
    dtype: str = "float32"

    @property
    def torch_dtype(self) -> torch.dtype:
        return _DTYPES[self.dtype]

    @property
    def pe_out_dim(self) -> int:
        return 2 * self.pe_features if self.positional_encoding else 2

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


class ReconModel(nn.Module):
    """Maps zero-filled coil images at a given scale to predicted coil data.

    The forward pass mirrors the training-time pipeline: encode magnitudes
    into a feature grid, evaluate the coordinate MLP at every voxel with the
    (fixed) positional encoding, and, when enabled, predict per-coil phases
    from the zero-filled phases plus the trunk features.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        dtype = config.torch_dtype
        generator = torch.Generator().manual_seed(config.seed)
        self.pe = (
            PositionalEncoder(config.pe_features, config.pe_sigma, generator, dtype)
            if config.positional_encoding
            else None
        )
        self.encoder = ScaleEmbeddedEncoder(
            coils=config.coils,
            channels=config.enc_channels,
            blocks=config.enc_blocks,
            feature_dim=config.feature_dim,
            groups=config.gn_groups,
            scale_embedding=config.scale_embedding,
            dtype=dtype,
        )
        self.field = ReconField(
            input_dim=config.pe_out_dim + config.feature_dim,
            coils=config.coils,
            hidden=config.hidden,
            phase_head=config.phase_prediction,
            dtype=dtype,
        )
        self.encoder.reset_parameters(generator)
        self.field.reset_parameters(generator)
        self._grid_cache: dict[tuple[int, int], torch.Tensor] = {}

    def grid_features(self, h: int, w: int) -> torch.Tensor:
        """[h*w, pe_out] encoded coordinates, cached per grid size."""
        key = (h, w)
        if key not in self._grid_cache:
            coords = make_grid(h, w).coords.reshape(-1, 2)
            x = torch.as_tensor(coords, dtype=self.config.torch_dtype)
            if self.pe is not None:
                with torch.no_grad():
                    x = self.pe(x)
            self._grid_cache[key] = x
        return self._grid_cache[key]

    def forward(
        self,
        zf_mag: torch.Tensor,
        zf_phase: torch.Tensor | None,
        scales: torch.Tensor,
    ) -> tuple[torch.Tensor, torch.Tensor | None]:
        """[B, c, h, w] magnitudes (+phases) -> per-coil intensities (+phases)."""
        if zf_mag.ndim != 4:
            raise ShapeError(f"expected [B, c, h, w] input, got shape {tuple(zf_mag.shape)}")
        b, c, h, w = zf_mag.shape
        scale_feat = (scales.reshape(b, 1).to(zf_mag.dtype)) / 4.0
        feats = self.encoder(zf_mag, scale_feat)
        v = feats.permute(0, 2, 3, 1).reshape(b * h * w, self.config.feature_dim)
        gamma = self.grid_features(h, w)
        gamma = gamma[None].expand(b, -1, -1).reshape(b * h * w, -1)
        base = torch.cat([gamma, v], dim=-1)
        phase_u = None
        if self.config.phase_prediction and zf_phase is not None:
            phase_u = zf_phase.permute(0, 2, 3, 1).reshape(b * h * w, c)
        intensities, phases, _ = self.field(base, phase_u)
        intensities = intensities.reshape(b, h, w, c).permute(0, 3, 1, 2)
        if phases is not None:
            phases = phases.reshape(b, h, w, c).permute(0, 3, 1, 2)
        return intensities, phases

    def predict_intensities(
        self, zf_mag: np.ndarray, scale: int
    ) -> np.ndarray:
        """Inference path: [c, h, w] zero-filled magnitudes -> intensities."""
        dtype = self.config.torch_dtype
        x = torch.as_tensor(np.asarray(zf_mag), dtype=dtype)[None]
        s = torch.tensor([float(scale)], dtype=dtype)
        with torch.no_grad():
            intensities, _ = self.forward(x, None, s)
        return intensities[0].numpy().copy()


__all__ = ["ModelConfig", "ReconModel", "scale_feature"]
