"""Multi-coil MRI parallel-imaging reconstruction with an implicit neural field.

One model, conditioned on the acceleration scale, reconstructs undersampled
multi-coil k-space at several acceleration factors. The package also ships
GRAPPA and zero-fill baselines, phantom simulation, SSIM/PSNR evaluation and
a CLI covering the whole pipeline.
"""

__version__ = "0.1.0"

from .containers import CoilImageStack, CoilSensitivities, KSpaceVolume
from .dataset import PhantomRecord, build_phantom_dataset, load_dataset, save_dataset
from .encoder import FeatureMap, ScaleEmbeddedEncoder, scale_feature
from .errors import CalibrationError, DatasetFormatError, ShapeError, ValidationError
from .field import CoordinateGrid, PositionalEncoder, ReconField, encode_position, make_grid
from .fourier import fft2c, ifft2c
from .model import ModelConfig, ReconModel
from .phantom import (
    Ellipse,
    PhantomSpec,
    generate_phantom,
    random_phantom_spec,
    simulate_acquisition,
    sos_combine,
)
from .rendering import kspace_l1_loss, render_kspace
from .sampling import SamplingMask, apply_mask, degrade, make_equispaced_mask, zero_filled_images
from .training import Checkpoint, TrainConfig, fit, lr_schedule, train_step
from .evaluation import ablation_report, evaluate, psnr, reconstruct, ssim

__all__ = [
    "CalibrationError",
    "Checkpoint",
    "CoilImageStack",
    "CoilSensitivities",
    "CoordinateGrid",
    "DatasetFormatError",
    "Ellipse",
    "FeatureMap",
    "KSpaceVolume",
    "ModelConfig",
    "PhantomRecord",
    "PhantomSpec",
    "PositionalEncoder",
    "ReconField",
    "ReconModel",
    "SamplingMask",
    "ScaleEmbeddedEncoder",
    "ShapeError",
    "TrainConfig",
    "ValidationError",
    "ablation_report",
    "apply_mask",
    "build_phantom_dataset",
    "degrade",
    "encode_position",
    "evaluate",
    "fft2c",
    "fit",
    "generate_phantom",
    "ifft2c",
    "kspace_l1_loss",
    "load_dataset",
    "lr_schedule",
    "make_equispaced_mask",
    "make_grid",
    "psnr",
    "random_phantom_spec",
    "reconstruct",
    "render_kspace",
    "save_dataset",
    "scale_feature",
    "simulate_acquisition",
    "sos_combine",
    "ssim",
    "train_step",
    "zero_filled_images",
]
