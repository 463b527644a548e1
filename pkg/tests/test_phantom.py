import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kspace_inr.containers import CoilImageStack
from kspace_inr.errors import ValidationError
from kspace_inr.fourier import ifft2c
from kspace_inr.phantom import (
    Ellipse,
    PhantomSpec,
    generate_phantom,
    random_phantom_spec,
    simulate_acquisition,
    sos_combine,
)


def single_ellipse_spec(coils=1, phase=((0.0,),), noise=0.0):
    return PhantomSpec(
        shape=(32, 32),
        coils=coils,
        ellipses=(Ellipse(center=(0.0, 0.0), axes=(0.6, 0.5), intensity=0.8),),
        phase_coeffs=phase,
        noise_sigma=noise,
        seed=5,
    )


def test_zero_phase_single_coil_is_real():
    gt, _ = generate_phantom(single_ellipse_spec())
    assert np.abs(gt.data.imag).max() == 0.0


def test_generation_is_deterministic():
    spec = single_ellipse_spec(coils=3, phase=((0.1, 0.2), (0.3, 0.0)))
    a, sa = generate_phantom(spec)
    b, sb = generate_phantom(spec)
    assert np.array_equal(a.data, b.data)
    assert np.array_equal(sa.data, sb.data)


def test_sensitivities_have_unit_sum_of_squares():
    _, sens = generate_phantom(single_ellipse_spec(coils=4))
    sos_sq = np.sum(np.abs(sens.data) ** 2, axis=0)
    assert np.abs(sos_sq - 1.0).max() < 1e-6


def test_sos_image_equals_phantom_magnitude():
    spec = single_ellipse_spec(coils=4, phase=((0.0, 0.3), (0.2, 0.0)))
    gt, _ = generate_phantom(spec)
    sos = sos_combine(gt.magnitude())
    inside = sos > 0
    assert inside.any()
    assert sos[inside] == pytest.approx(0.8, abs=1e-9)


def test_invalid_intensity_names_field():
    spec = PhantomSpec(
        shape=(16, 16),
        coils=1,
        ellipses=(Ellipse(center=(0, 0), axes=(0.5, 0.5), intensity=1.5),),
    )
    with pytest.raises(ValidationError, match="intensity"):
        generate_phantom(spec)


def test_acquisition_of_constant_image_is_dc_only():
    img = CoilImageStack(np.ones((1, 4, 4), dtype=complex))
    k = simulate_acquisition(img, noise_sigma=0.0)
    assert k.data[0, 2, 2] == pytest.approx(4.0)
    assert np.abs(np.delete(k.data.ravel(), 10)).max() < 1e-12


def test_noiseless_acquisition_round_trip():
    gt, _ = generate_phantom(single_ellipse_spec(coils=2, phase=((0.0, 0.4),)))
    k = simulate_acquisition(gt, noise_sigma=0.0)
    back = ifft2c(k.data)
    assert np.abs(back - gt.data).max() < 1e-10 * np.abs(gt.data).max()


def test_noise_is_reproducible_given_seed():
    gt, _ = generate_phantom(single_ellipse_spec())
    k1 = simulate_acquisition(gt, noise_sigma=0.1, seed=42)
    k2 = simulate_acquisition(gt, noise_sigma=0.1, seed=42)
    k3 = simulate_acquisition(gt, noise_sigma=0.1, seed=43)
    assert np.array_equal(k1.data, k2.data)
    assert not np.array_equal(k1.data, k3.data)


def test_sos_combine_trivia():
    m = np.full((4, 8, 8), 0.3)
    assert sos_combine(m) == pytest.approx(np.sqrt(4) * 0.3)
    single = np.random.default_rng(0).uniform(size=(1, 5, 5))
    assert np.array_equal(sos_combine(single), single[0])
    two = np.zeros((2, 2, 2))
    two[0, 0, 0], two[1, 0, 0] = 3.0, 4.0
    assert sos_combine(two)[0, 0] == pytest.approx(5.0)


def test_sos_combine_rejects_negative_entries():
    with pytest.raises(ValidationError):
        sos_combine(np.array([[[-1.0, 0.0], [0.0, 0.0]]]))


@given(alpha=st.floats(min_value=0.0, max_value=100.0, allow_nan=False))
@settings(max_examples=25, deadline=None)
def test_sos_combine_is_1_homogeneous(alpha):
    m = np.random.default_rng(1).uniform(size=(3, 6, 6))
    assert np.allclose(sos_combine(alpha * m), alpha * sos_combine(m), atol=1e-12)


def test_random_spec_is_reproducible():
    a = random_phantom_spec((64, 64), 4, 0.01, np.random.default_rng(9))
    b = random_phantom_spec((64, 64), 4, 0.01, np.random.default_rng(9))
    assert a == b
    ga, _ = generate_phantom(a)
    gb, _ = generate_phantom(b)
    assert np.array_equal(ga.data, gb.data)
