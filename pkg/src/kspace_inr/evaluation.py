"""Inference and evaluation: reconstruction, SSIM/PSNR, metric tables, ablation.

PSNR uses the per-image peak of the reference (10*log10(max(ref)^2 / MSE),
infinity for identical images). SSIM follows the classic windowed formula:
11x11 Gaussian window with sigma 1.5, K1=0.01, K2=0.03, dynamic range equal
to max(ref), averaged over all fully contained windows.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .containers import KSpaceVolume
from .dataset import PhantomRecord
from .errors import ShapeError, ValidationError
from .fourier import ifft2c
from .model import ReconModel
from .phantom import sos_combine
from .sampling import apply_mask, make_equispaced_mask
from .training import Checkpoint, TrainConfig, fit, normalization_constant

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _zero_fill(k_undersampled: KSpaceVolume) -> tuple[np.ndarray, np.ndarray]:
    zf = ifft2c(k_undersampled.data)
    mag = np.abs(zf)
    return mag, np.where(mag == 0, 0.0, np.angle(zf))


def reconstruct_with_model(
    model: ReconModel,
    k_undersampled: KSpaceVolume,
    scale: int,
    normalization: str = "zf_max",
) -> np.ndarray:
    """Core inference path shared by :func:`reconstruct` and :func:`evaluate`."""
    if k_undersampled.coils != model.config.coils:
        raise ValidationError(
            f"k-space has {k_undersampled.coils} coils, model expects {model.config.coils}"
        )
    zf_mag, _ = _zero_fill(k_undersampled)
    norm = normalization_constant(float(sos_combine(zf_mag).max()), normalization)
    intensities = model.predict_intensities(zf_mag / norm, scale)
    return np.sqrt(np.sum(intensities.astype(np.float64) ** 2, axis=0)) * norm


def reconstruct(
    checkpoint: Checkpoint, k_undersampled: KSpaceVolume, scale: int
) -> np.ndarray:
    """Reconstruct the magnitude image from undersampled multi-coil k-space.

    The phase head is not evaluated here; it only serves training-time
    k-space rendering. Scales the checkpoint was not trained on are allowed
    but warned about.
    """
    if scale not in checkpoint.train_config.scales:
        warnings.warn(
            f"scale {scale} was not in the training scales "
            f"{checkpoint.train_config.scales}; extrapolating",
            stacklevel=2,
        )
    model = checkpoint.build_model()
    return reconstruct_with_model(
        model, k_undersampled, scale, checkpoint.norm_info.get("mode", "zf_max")
    )


def psnr(ref: np.ndarray, test: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB; inf for identical images."""
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise ShapeError(f"shape mismatch: {ref.shape} vs {test.shape}")
    peak = ref.max()
    if peak <= 0 and ref.min() == 0:
        raise ValidationError("reference image is identically zero")
    mse = np.mean((ref - test) ** 2)
    if mse == 0:
        return math.inf
    return float(10.0 * np.log10(peak**2 / mse))


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords**2) / (2.0 * sigma**2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def _windowed(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    windows = np.lib.stride_tricks.sliding_window_view(img, kernel.shape)
    return np.tensordot(windows, kernel, axes=([2, 3], [0, 1]))


def ssim(ref: np.ndarray, test: np.ndarray) -> float:
    """Mean local SSIM over all fully contained 11x11 Gaussian windows."""
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise ShapeError(f"shape mismatch: {ref.shape} vs {test.shape}")
    if min(ref.shape) < SSIM_WINDOW:
        raise ValidationError(
            f"images must be at least {SSIM_WINDOW} pixels per side, got {ref.shape}"
        )
    peak = ref.max()
    if peak <= 0:
        raise ValidationError("reference image must have a positive maximum")
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2
    kernel = _gaussian_window()
    mu_x = _windowed(ref, kernel)
    mu_y = _windowed(test, kernel)
    sxx = _windowed(ref * ref, kernel) - mu_x * mu_x
    syy = _windowed(test * test, kernel) - mu_y * mu_y
    sxy = _windowed(ref * test, kernel) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * sxy + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


@dataclass(frozen=True)
class MetricRow:
    method: str
    scale: int
    mean_ssim: float
    mean_psnr: float
    n_records: int


def evaluate(
    checkpoint: Checkpoint,
    records: list[PhantomRecord],
    scales: tuple[int, ...],
    baselines: tuple[str, ...] = (),
) -> list[MetricRow]:
    """Per-scale mean SSIM/PSNR for the model and requested baselines."""
    from .baselines import grappa_calibrate, grappa_reconstruct, zero_fill_baseline

    if not records:
        raise ValidationError("evaluation set must be nonempty")
    for b in baselines:
        if b not in ("grappa", "zerofill"):
            raise ValidationError(f"unknown baseline {b!r}")
    model = checkpoint.build_model()
    norm_mode = checkpoint.norm_info.get("mode", "zf_max")
    acs = checkpoint.train_config.acs_fraction
    methods = ["model", *baselines]
    rows = []
    for method in methods:
        for scale in scales:
            ssims, psnrs = [], []
            for rec in records:
                mask = make_equispaced_mask(rec.kspace.shape[2], scale, acs)
                k_u = apply_mask(rec.kspace, mask)
                if method == "model":
                    img = reconstruct_with_model(model, k_u, scale, norm_mode)
                elif method == "zerofill":
                    img = zero_fill_baseline(k_u)
                else:
                    start, end = mask.acs_range
                    acs_block = k_u.data[:, :, start:end].transpose(0, 2, 1)
                    weights = grappa_calibrate(acs_block, scale=scale)
                    img = grappa_reconstruct(k_u, mask, weights)
                ssims.append(ssim(rec.sos, img))
                psnrs.append(psnr(rec.sos, img))
            rows.append(
                MetricRow(
                    method=method,
                    scale=scale,
                    mean_ssim=float(np.mean(ssims)),
                    mean_psnr=float(np.mean(psnrs)),
                    n_records=len(records),
                )
            )
    return rows


# Published full-scale brain-MRI reference values for the five ablation arms
# (SSIM / PSNR at scales 4, 5, 6). Printed for context only, never asserted:
# desk-scale phantom runs are not comparable.
ABLATION_REFERENCE = {
    "none": ((0.9707, 41.5927), (0.9726, 41.9174), (0.9631, 39.9647)),
    "positional_encoding": ((0.9722, 42.0947), (0.9741, 42.5105), (0.9652, 40.5191)),
    "scale_embedding": ((0.9715, 41.6752), (0.9736, 41.9687), (0.9639, 39.9786)),
    "phase_prediction": ((0.9745, 42.8396), (0.9768, 43.3088), (0.9674, 41.0928)),
    "all": ((0.9761, 43.2289), (0.9779, 43.5963), (0.9690, 41.4567)),
}

ABLATION_ARMS = (
    ("none", dict(positional_encoding=False, scale_embedding=False, phase_prediction=False)),
    ("positional_encoding", dict(positional_encoding=True, scale_embedding=False, phase_prediction=False)),
    ("scale_embedding", dict(positional_encoding=False, scale_embedding=True, phase_prediction=False)),
    ("phase_prediction", dict(positional_encoding=False, scale_embedding=False, phase_prediction=True)),
    ("all", dict(positional_encoding=True, scale_embedding=True, phase_prediction=True)),
)


@dataclass
class AblationArmResult:
    name: str
    config: TrainConfig
    rows: list[MetricRow]


def ablation_report(
    records: list[PhantomRecord],
    base_config: TrainConfig,
    eval_records: list[PhantomRecord] | None = None,
    verbose: bool = False,
) -> list[AblationArmResult]:
    """Train and evaluate the five toggle arms on identical data and seeds."""
    base_config.validate()
    eval_records = eval_records if eval_records is not None else records
    results = []
    for name, toggles in ABLATION_ARMS:
        config = replace(base_config, **toggles)
        if verbose:
            print(f"[ablate] training arm {name!r} ({config.iterations} iterations)")
        checkpoint, _ = fit(records, config)
        rows = evaluate(checkpoint, eval_records, config.scales)
        results.append(AblationArmResult(name=name, config=config, rows=rows))
    return results


def format_ablation_reference() -> str:
    """Context block of published full-scale reference values (not asserted)."""
    lines = [
        "reference values from the original full-scale brain-MRI study "
        "(context only, not comparable to desk-scale phantoms):"
    ]
    for name, per_scale in ABLATION_REFERENCE.items():
        cells = "  ".join(f"s={s}: {v[0]:.4f}/{v[1]:.4f}" for s, v in zip((4, 5, 6), per_scale))
        lines.append(f"  {name:<22} {cells}")
    return "\n".join(lines)
