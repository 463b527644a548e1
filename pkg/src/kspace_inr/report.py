"""Run artifacts: grayscale image files, metric CSVs and matplotlib figures."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from PIL import Image

from .evaluation import MetricRow


def save_grayscale_png(image: np.ndarray, path, vmax: float | None = None) -> None:
    """Write a 16-bit grayscale PNG; values are scaled by ``vmax`` (or the max)."""
    img = np.asarray(image, dtype=np.float64)
    top = float(vmax) if vmax is not None else float(img.max())
    if top <= 0:
        top = 1.0
    scaled = np.clip(img / top, 0.0, 1.0)
    Image.fromarray(np.round(scaled * 65535.0).astype(np.uint16)).save(path)


def write_metric_csv(rows: list[MetricRow], path, header_meta: dict | None = None) -> None:
    """Table II-shaped CSV: method, scale, mean_ssim, mean_psnr, n_records."""
    path = Path(path)
    with path.open("w", newline="") as f:
        if header_meta:
            f.write(f"# config: {json.dumps(header_meta, sort_keys=True)}\n")
        writer = csv.writer(f)
        writer.writerow(["method", "scale", "mean_ssim", "mean_psnr", "n_records"])
        for row in rows:
            writer.writerow(
                [row.method, row.scale, f"{row.mean_ssim:.6f}", _fmt(row.mean_psnr), row.n_records]
            )


def _fmt(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.4f}"


def plot_metric_rows(rows: list[MetricRow], path) -> None:
    """SSIM and PSNR versus scale, one line per method."""
    methods = sorted({r.method for r in rows})
    fig, (ax_ssim, ax_psnr) = plt.subplots(1, 2, figsize=(9, 3.5))
    for method in methods:
        sub = sorted((r for r in rows if r.method == method), key=lambda r: r.scale)
        scales = [r.scale for r in sub]
        ax_ssim.plot(scales, [r.mean_ssim for r in sub], marker="o", label=method)
        psnrs = [r.mean_psnr for r in sub]
        if all(math.isfinite(p) for p in psnrs):
            ax_psnr.plot(scales, psnrs, marker="o", label=method)
    ax_ssim.set_xlabel("scale")
    ax_ssim.set_ylabel("mean SSIM")
    ax_psnr.set_xlabel("scale")
    ax_psnr.set_ylabel("mean PSNR (dB)")
    ax_ssim.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_loss_curve(losses: list[float], path) -> None:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(np.arange(len(losses)), losses, lw=0.8)
    ax.set_xlabel("iteration")
    ax.set_ylabel("loss")
    ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_error_map(recon: np.ndarray, reference: np.ndarray, path) -> None:
    """Side-by-side reconstruction and |recon - reference| heat map figure."""
    err = np.abs(np.asarray(recon) - np.asarray(reference))
    fig, (ax_img, ax_err) = plt.subplots(1, 2, figsize=(8, 3.8))
    im0 = ax_img.imshow(recon, cmap="gray")
    ax_img.set_title("reconstruction")
    ax_img.axis("off")
    fig.colorbar(im0, ax=ax_img, fraction=0.046)
    im1 = ax_err.imshow(err, cmap="magma")
    ax_err.set_title("|recon - reference|")
    ax_err.axis("off")
    fig.colorbar(im1, ax=ax_err, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
