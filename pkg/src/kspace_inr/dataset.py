"""Dataset persistence: one HDF5 group per record, lossless complex storage.

Each record stores ``kspace`` (fully-sampled, complex [c, h, w]), ``sens``
(complex [c, h, w]), ``sos`` (real [h, w] ground-truth sum-of-squares image)
and ``meta`` (JSON). Complex arrays are persisted as trailing (real, imag)
float64 pairs so round trips are bit-exact and files stay portable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import h5py
import numpy as np

from .containers import CoilImageStack, CoilSensitivities, KSpaceVolume
from .errors import DatasetFormatError
from .phantom import (
    PhantomSpec,
    generate_phantom,
    random_phantom_spec,
    simulate_acquisition,
    sos_combine,
)

_COMPLEX_KEYS = ("kspace", "sens")


@dataclass
class PhantomRecord:
    """One simulated acquisition plus its ground truth."""

    kspace: KSpaceVolume
    sens: CoilSensitivities
    sos: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple:
        return self.kspace.shape


def complex_to_pairs(z: np.ndarray) -> np.ndarray:
    return np.stack([z.real, z.imag], axis=-1).astype(np.float64)


def pairs_to_complex(p: np.ndarray) -> np.ndarray:
    return p[..., 0] + 1j * p[..., 1]


def save_dataset(path, records: list[PhantomRecord]) -> None:
    """Write records to ``path``, preserving insertion order."""
    path = Path(path)
    with h5py.File(path, "w") as f:
        f.attrs["format"] = "kspace-inr-dataset"
        f.attrs["n_records"] = len(records)
        for i, rec in enumerate(records):
            g = f.create_group(f"record_{i:05d}")
            g.create_dataset("kspace", data=complex_to_pairs(rec.kspace.data), track_times=False)
            g.create_dataset("sens", data=complex_to_pairs(rec.sens.data), track_times=False)
            g.create_dataset("sos", data=np.asarray(rec.sos, dtype=np.float64), track_times=False)
            g.create_dataset(
                "meta",
                data=np.bytes_(json.dumps(rec.meta, sort_keys=True)),
                track_times=False,
            )


def load_dataset(path) -> list[PhantomRecord]:
    """Read records back in insertion order; errors name the missing key."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    records = []
    with h5py.File(path, "r") as f:
        names = sorted(k for k in f.keys() if k.startswith("record_"))
        for name in names:
            g = f[name]
            for key in ("kspace", "sens", "sos", "meta"):
                if key not in g:
                    raise DatasetFormatError(f"record {name!r} is missing key {key!r} in {path}")
            kspace = pairs_to_complex(np.asarray(g["kspace"]))
            sens = pairs_to_complex(np.asarray(g["sens"]))
            if kspace.ndim != 3 or sens.shape != kspace.shape:
                raise DatasetFormatError(
                    f"record {name!r}: 'kspace'/'sens' shapes are inconsistent in {path}"
                )
            records.append(
                PhantomRecord(
                    kspace=KSpaceVolume(kspace),
                    sens=CoilSensitivities(sens),
                    sos=np.asarray(g["sos"], dtype=np.float64),
                    meta=json.loads(bytes(np.asarray(g["meta"])).decode()),
                )
            )
    return records


def build_phantom_dataset(
    count: int,
    shape: tuple[int, int],
    coils: int,
    noise_sigma: float,
    seed: int,
) -> list[PhantomRecord]:
    """Simulate ``count`` random phantom acquisitions, reproducibly."""
    rng = np.random.default_rng(seed)
    records = []
    for idx in range(count):
        spec = random_phantom_spec(shape, coils, noise_sigma, rng)
        ground_truth, sens = generate_phantom(spec)
        kspace = simulate_acquisition(ground_truth, noise_sigma, seed=spec.seed)
        sos = sos_combine(ground_truth.magnitude())
        meta = {
            "index": idx,
            "seed": spec.seed,
            "noise_sigma": noise_sigma,
            "shape": list(shape),
            "coils": coils,
            "ellipses": [
                {
                    "center": list(e.center),
                    "axes": list(e.axes),
                    "angle": e.angle,
                    "intensity": e.intensity,
                }
                for e in spec.ellipses
            ],
            "phase_coeffs": [list(row) for row in spec.phase_coeffs],
        }
        records.append(PhantomRecord(kspace=kspace, sens=sens, sos=sos, meta=meta))
    return records
