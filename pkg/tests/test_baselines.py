import numpy as np
import pytest

from kspace_inr.baselines import (
    GrappaKernelSpec,
    _source_matrix,
    fillable_columns,
    grappa_calibrate,
    grappa_fill,
    grappa_reconstruct,
    zero_fill_baseline,
)
from kspace_inr.containers import KSpaceVolume
from kspace_inr.errors import CalibrationError, ValidationError
from kspace_inr.evaluation import psnr
from kspace_inr.fourier import ifft2c
from kspace_inr.phantom import generate_phantom, simulate_acquisition, sos_combine
from kspace_inr.sampling import apply_mask, make_equispaced_mask
from tests.test_phantom import single_ellipse_spec


def planted_kspace(c, h, w, mask, rng, separable=False):
    """K-space that a shift-invariant kernel can interpolate exactly.

    A single complex-exponential mode along the phase-encoding axis makes any
    ACS-exact kernel globally exact. Missing edge columns without a complete
    source pattern are planted as zero, matching the documented skip-at-edges
    behavior.
    """
    if separable:
        u = (rng.normal(size=c) + 1j * rng.normal(size=c))[:, None] * np.exp(
            2j * np.pi * 5 / h
        ) ** np.arange(h)[None, :]
    else:
        u = rng.normal(size=(c, h)) + 1j * rng.normal(size=(c, h))
    z = np.exp(2j * np.pi * 7 / w) ** np.arange(w)
    truth = u[:, :, None] * z[None, None, :]
    missing = set(np.where(~mask.line_selector)[0])
    unfillable = sorted(missing - set(fillable_columns(w, mask)))
    truth[:, :, unfillable] = 0
    return truth


def acs_block(k_u: KSpaceVolume, mask) -> np.ndarray:
    start, end = mask.acs_range
    return k_u.data[:, :, start:end].transpose(0, 2, 1)


def calibration_residual(acs, weights, r):
    offs = weights.geometry.line_offsets(weights.scale, r)
    t_min = int(-offs.min())
    t_max = acs.shape[1] - int(offs.max())
    targets = np.arange(t_min, t_max)
    a = _source_matrix(acs[:, targets[:, None] + offs[None, :], :], weights.geometry)
    b = acs[:, targets, :].transpose(1, 2, 0).reshape(-1, weights.coils)
    return np.linalg.norm(a @ weights.weights[r] - b) / np.linalg.norm(b)


@pytest.mark.parametrize("scale", [2, 3, 4])
def test_planted_kernel_fill_is_exact(scale):
    rng = np.random.default_rng(scale)
    c, h, w = 4, 32, 96
    mask = make_equispaced_mask(w, scale, 0.25)
    truth = planted_kspace(c, h, w, mask, rng)
    k_u = apply_mask(KSpaceVolume(truth), mask)
    weights = grappa_calibrate(acs_block(k_u, mask), scale=scale)
    filled = grappa_fill(k_u, mask, weights)
    rel = np.linalg.norm(filled.data - truth) / np.linalg.norm(truth)
    assert rel <= 1e-6
    sel = mask.line_selector
    assert np.array_equal(filled.data[:, :, sel], k_u.data[:, :, sel])
    image = grappa_reconstruct(k_u, mask, weights)
    ref = sos_combine(np.abs(ifft2c(truth)))
    assert psnr(ref, image) >= 100


def test_separable_plant_reaches_tighter_calibration_residual():
    rng = np.random.default_rng(0)
    c, h, w, scale = 8, 48, 96, 2
    mask = make_equispaced_mask(w, scale, 0.25)
    truth = planted_kspace(c, h, w, mask, rng, separable=True)
    k_u = apply_mask(KSpaceVolume(truth), mask)
    acs = acs_block(k_u, mask)
    weights = grappa_calibrate(acs, scale=scale)
    assert calibration_residual(acs, weights, 1) <= 1e-8


def test_scale_one_yields_empty_weights_and_identity_path():
    rng = np.random.default_rng(1)
    data = rng.normal(size=(2, 16, 16)) + 1j * rng.normal(size=(2, 16, 16))
    mask = make_equispaced_mask(16, 1, 0.25)
    k = KSpaceVolume(data)
    weights = grappa_calibrate(acs_block(k, mask), scale=1)
    assert weights.weights == {}
    recon = grappa_reconstruct(k, mask, weights)
    expected = sos_combine(np.abs(ifft2c(data)))
    assert np.array_equal(recon, expected)


def test_duplicate_coils_get_identical_predictions():
    rng = np.random.default_rng(2)
    c, h, w, scale = 3, 32, 96, 2
    mask = make_equispaced_mask(w, scale, 0.25)
    truth = planted_kspace(c, h, w, mask, rng)
    truth[1] = truth[0]
    k_u = apply_mask(KSpaceVolume(truth), mask)
    weights = grappa_calibrate(acs_block(k_u, mask), scale=scale)
    filled = grappa_fill(k_u, mask, weights)
    missing = ~mask.line_selector
    a = filled.data[0, :, missing]
    b = filled.data[1, :, missing]
    assert np.abs(a - b).max() <= 1e-10 * np.abs(a).max()


def test_acquired_lines_are_preserved_bitwise():
    rng = np.random.default_rng(3)
    c, h, w, scale = 2, 32, 96, 3
    mask = make_equispaced_mask(w, scale, 0.3)
    data = rng.normal(size=(c, h, w)) + 1j * rng.normal(size=(c, h, w))
    k_u = apply_mask(KSpaceVolume(data), mask)
    weights = grappa_calibrate(acs_block(k_u, mask), scale=scale)
    filled = grappa_fill(k_u, mask, weights)
    sel = mask.line_selector
    assert np.array_equal(filled.data[:, :, sel], k_u.data[:, :, sel])


def test_grappa_is_linear_in_kspace_for_fixed_weights():
    rng = np.random.default_rng(4)
    c, h, w, scale = 2, 32, 96, 2
    mask = make_equispaced_mask(w, scale, 0.3)
    data = rng.normal(size=(c, h, w)) + 1j * rng.normal(size=(c, h, w))
    k_u = apply_mask(KSpaceVolume(data), mask)
    weights = grappa_calibrate(acs_block(k_u, mask), scale=scale)
    alpha = 2.5
    one = grappa_reconstruct(k_u, mask, weights)
    scaled = grappa_reconstruct(KSpaceVolume(alpha * k_u.data), mask, weights)
    assert np.abs(scaled - alpha * one).max() <= 1e-10 * one.max()


def test_underdetermined_calibration_reports_counts():
    rng = np.random.default_rng(5)
    acs = rng.normal(size=(4, 5, 16)) + 1j * rng.normal(size=(4, 5, 16))
    with pytest.raises(CalibrationError, match="equations"):
        grappa_calibrate(acs, scale=4)


def test_fill_rejects_mismatched_geometry():
    rng = np.random.default_rng(6)
    c, h, w = 2, 32, 96
    mask2 = make_equispaced_mask(w, 2, 0.3)
    mask3 = make_equispaced_mask(w, 3, 0.3)
    k_u = apply_mask(KSpaceVolume(rng.normal(size=(c, h, w)) + 0j), mask2)
    weights = grappa_calibrate(acs_block(k_u, mask2), scale=2)
    with pytest.raises(ValidationError):
        grappa_fill(k_u, mask3, weights)


def test_grappa_beats_zero_fill_on_smooth_phantom():
    from kspace_inr.phantom import Ellipse, PhantomSpec

    spec = PhantomSpec(
        shape=(64, 64),
        coils=6,
        ellipses=(
            Ellipse(center=(0.0, 0.0), axes=(0.6, 0.5), intensity=0.8),
            Ellipse(center=(0.2, -0.15), axes=(0.15, 0.1), angle=0.4, intensity=0.2),
        ),
        phase_coeffs=((0.0, 0.3), (0.2, 0.0)),
    )
    gt, _ = generate_phantom(spec)
    k = simulate_acquisition(gt, noise_sigma=0.0)
    mask = make_equispaced_mask(64, 2, 0.25)
    k_u = apply_mask(k, mask)
    ref = sos_combine(gt.magnitude())
    weights = grappa_calibrate(acs_block(k_u, mask), scale=2)
    grappa_img = grappa_reconstruct(k_u, mask, weights)
    zf_img = zero_fill_baseline(k_u)
    assert psnr(ref, grappa_img) > psnr(ref, zf_img)


def test_zero_fill_baseline_trivia():
    rng = np.random.default_rng(7)
    data = rng.normal(size=(2, 16, 16)) + 1j * rng.normal(size=(2, 16, 16))
    k = KSpaceVolume(data)
    expected = sos_combine(np.abs(ifft2c(data)))
    assert np.abs(zero_fill_baseline(k) - expected).max() < 1e-12
    zeros = KSpaceVolume(np.zeros((2, 8, 8), complex))
    assert np.abs(zero_fill_baseline(zeros)).max() == 0.0
