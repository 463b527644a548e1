"""Coordinate MLP: random Fourier positional encoding, trunk, phase head.

Coordinates live on the [-1, 1]^2 grid. The positional encoder lifts them to
2L dimensions with a fixed Gaussian matrix that is never trained. The trunk
is eight fully connected layers with the full input re-concatenated at layers
4 and 7; layer 8 emits per-coil intensities without an activation. The phase
head is one linear layer on [zero-filled phases, layer-8 input features].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .errors import ShapeError, ValidationError


@dataclass(frozen=True)
class CoordinateGrid:
    """Uniform [h, w, 2] grid of coordinates spanning [-1, 1] per axis."""

    coords: np.ndarray


def make_grid(h: int, w: int) -> CoordinateGrid:
    if h < 2 or w < 2:
        raise ValidationError(f"grid sides must be >= 2, got ({h}, {w})")
    ys = np.linspace(-1.0, 1.0, h)
    xs = np.linspace(-1.0, 1.0, w)
    coords = np.stack(np.meshgrid(ys, xs, indexing="ij"), axis=-1)
    return CoordinateGrid(coords)


class PositionalEncoder(nn.Module):
    """gamma(x) = [cos(2 pi B x), sin(2 pi B x)] with fixed B ~ N(0, sigma^2)."""

    def __init__(
        self,
        n_features: int = 128,
        sigma: float = 1.0,
        generator: torch.Generator | None = None,
        dtype: torch.dtype = torch.float32,
    ):
        super().__init__()
        self.n_features = n_features
        self.sigma = sigma
        b = torch.empty(n_features, 2, dtype=dtype)
        with torch.no_grad():
            b.normal_(0.0, sigma, generator=generator)
        self.register_buffer("b_matrix", b)

    @property
    def out_dim(self) -> int:
        return 2 * self.n_features

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        proj = 2.0 * torch.pi * x @ self.b_matrix.T
        return torch.cat([torch.cos(proj), torch.sin(proj)], dim=-1)

    def encode(self, x: np.ndarray) -> np.ndarray:
        """Range-checked numpy entry point for coordinates in [-1, 1]^2."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != 2:
            raise ShapeError(f"coordinates must have a trailing axis of 2, got {x.shape}")
        if np.any(np.abs(x) > 1.0):
            raise ValidationError("coordinates must lie in [-1, 1]")
        with torch.no_grad():
            out = self.forward(torch.as_tensor(x, dtype=torch.float64).reshape(-1, 2))
        return out.numpy().reshape(x.shape[:-1] + (self.out_dim,))


def encode_position(x, pe: PositionalEncoder) -> np.ndarray:
    """Encode a single coordinate pair to its 2L-dimensional lift."""
    return pe.encode(np.asarray(x, dtype=np.float64))


class ReconField(nn.Module):
    """Eight-layer trunk with skip concatenations plus a linear phase head."""

    SKIP_LAYERS = (3, 6)  # zero-based: full input re-enters layers 4 and 7

    def __init__(
        self,
        input_dim: int,
        coils: int,
        hidden: int = 256,
        phase_head: bool = True,
        dtype: torch.dtype = torch.float32,
    ):
        super().__init__()
        self.input_dim = input_dim
        self.coils = coils
        self.hidden = hidden
        in_dims = [input_dim] + [hidden] * 7
        for i in self.SKIP_LAYERS:
            in_dims[i] = input_dim + hidden
        out_dims = [hidden] * 7 + [coils]
        self.trunk = nn.ModuleList(
            nn.Linear(i, o, dtype=dtype) for i, o in zip(in_dims, out_dims)
        )
        self.phase_head = (
            nn.Linear(hidden + coils, coils, dtype=dtype) if phase_head else None
        )

    def forward(
        self, base: torch.Tensor, phase_u: torch.Tensor | None = None
    ) -> tuple[torch.Tensor, torch.Tensor | None, torch.Tensor]:
        """[N, input_dim] -> (intensities [N, c], phases [N, c] or None, feats [N, hidden])."""
        if base.shape[-1] != self.input_dim:
            raise ShapeError(f"expected input dim {self.input_dim}, got {base.shape[-1]}")
        t = base
        for i in range(7):
            if i in self.SKIP_LAYERS:
                t = torch.cat([base, t], dim=-1)
            t = F.silu(self.trunk[i](t))
        feats = t
        intensities = self.trunk[7](feats)
        phases = None
        if self.phase_head is not None and phase_u is not None:
            phases = self.phase_head(torch.cat([phase_u, feats], dim=-1))
        return intensities, phases, feats

    def trunk_forward(self, gamma_x: np.ndarray, v_x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-voxel trunk evaluation on numpy vectors."""
        base = np.concatenate([np.asarray(gamma_x).ravel(), np.asarray(v_x).ravel()])
        if base.shape[0] != self.input_dim:
            raise ShapeError(
                f"gamma+feature length {base.shape[0]} != trunk input dim {self.input_dim}"
            )
        dtype = self.trunk[0].weight.dtype
        with torch.no_grad():
            inten, _, feats = self.forward(torch.as_tensor(base, dtype=dtype)[None])
        return inten[0].numpy().copy(), feats[0].numpy().copy()

    def phase_forward(self, phase_u: np.ndarray, trunk_features: np.ndarray) -> np.ndarray:
        """Per-voxel phase head evaluation on numpy vectors (radians out)."""
        if self.phase_head is None:
            raise ValidationError("this field was built without a phase head")
        phase_u = np.asarray(phase_u).ravel()
        feats = np.asarray(trunk_features).ravel()
        if phase_u.shape[0] != self.coils or feats.shape[0] != self.hidden:
            raise ShapeError(
                f"expected [{self.coils}] phases and [{self.hidden}] features, "
                f"got {phase_u.shape} and {feats.shape}"
            )
        dtype = self.phase_head.weight.dtype
        x = torch.as_tensor(np.concatenate([phase_u, feats]), dtype=dtype)[None]
        with torch.no_grad():
            return self.phase_head(x)[0].numpy().copy()

    def reset_parameters(self, generator: torch.Generator) -> None:
        for layer in self.trunk:
            bound = 1.0 / float(np.sqrt(layer.in_features))
            with torch.no_grad():
                layer.weight.uniform_(-bound, bound, generator=generator)
                layer.bias.zero_()
        if self.phase_head is not None:
            with torch.no_grad():
                self.phase_head.weight.zero_()
                self.phase_head.bias.zero_()
