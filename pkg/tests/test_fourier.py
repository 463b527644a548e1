import numpy as np
import pytest
import torch

from kspace_inr.fourier import fft2c, fft2c_t, ifft2c, ifft2c_t


def test_constant_image_has_single_centered_dc_bin():
    img = np.ones((1, 4, 4), dtype=complex)
    k = fft2c(img)
    assert k[0, 2, 2] == pytest.approx(4.0)
    off_dc = np.delete(k.ravel(), 2 * 4 + 2)
    assert np.abs(off_dc).max() < 1e-12


@pytest.mark.parametrize("shape", [(1, 4, 4), (3, 8, 6), (2, 7, 5), (1, 5, 8)])
def test_round_trip_even_and_odd_sizes(shape):
    rng = np.random.default_rng(7)
    z = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    back = ifft2c(fft2c(z))
    assert np.abs(back - z).max() < 1e-12 * np.abs(z).max()


def test_parseval_energy_preserved():
    rng = np.random.default_rng(11)
    z = rng.normal(size=(2, 16, 16)) + 1j * rng.normal(size=(2, 16, 16))
    k = fft2c(z)
    assert np.linalg.norm(k) == pytest.approx(np.linalg.norm(z), rel=1e-12)


def test_torch_and_numpy_paths_agree():
    rng = np.random.default_rng(3)
    z = rng.normal(size=(2, 9, 12)) + 1j * rng.normal(size=(2, 9, 12))
    k_np = fft2c(z)
    k_t = fft2c_t(torch.as_tensor(z)).numpy()
    assert np.abs(k_np - k_t).max() < 1e-12
    x_np = ifft2c(z)
    x_t = ifft2c_t(torch.as_tensor(z)).numpy()
    assert np.abs(x_np - x_t).max() < 1e-12
