import numpy as np
import pytest
import torch

from kspace_inr.encoder import ResidualBlock, ScaleEmbeddedEncoder, scale_feature
from kspace_inr.errors import ShapeError, ValidationError


def make_encoder(coils=2, scale_embedding=True, seed=0, dtype=torch.float64):
    enc = ScaleEmbeddedEncoder(
        coils=coils, channels=16, blocks=2, feature_dim=8, groups=4,
        scale_embedding=scale_embedding, dtype=dtype,
    )
    enc.reset_parameters(torch.Generator().manual_seed(seed))
    return enc


def test_output_shape_uses_feature_dim_last():
    enc = ScaleEmbeddedEncoder(coils=16, dtype=torch.float32)
    enc.reset_parameters(torch.Generator().manual_seed(0))
    fm = enc.encode(np.random.default_rng(0).uniform(size=(16, 64, 64)), scale=4)
    assert fm.data.shape == (64, 64, 128)
    assert fm.feature_dim == 128


def test_encode_is_deterministic():
    enc = make_encoder()
    x = np.random.default_rng(1).uniform(size=(2, 12, 12))
    a = enc.encode(x, scale=4)
    b = enc.encode(x, scale=4)
    assert np.array_equal(a.data, b.data)


def test_scale_conditioning_changes_output():
    enc = make_encoder()
    x = np.random.default_rng(2).uniform(size=(2, 12, 12))
    a = enc.encode(x, scale=4)
    b = enc.encode(x, scale=6)
    assert np.abs(a.data - b.data).max() > 0


def test_zeroed_scale_projections_make_scales_equivalent():
    enc = make_encoder()
    with torch.no_grad():
        for block in enc.blocks:
            block.scale_proj.weight.zero_()
            block.scale_proj.bias.zero_()
    x = np.random.default_rng(3).uniform(size=(2, 12, 12))
    outs = [enc.encode(x, scale=s).data for s in (1, 4, 5, 6)]
    for other in outs[1:]:
        assert np.array_equal(outs[0], other)


def test_encoder_without_scale_embedding_ignores_scale():
    enc = make_encoder(scale_embedding=False)
    x = np.random.default_rng(4).uniform(size=(2, 12, 12))
    assert np.array_equal(enc.encode(x, 4).data, enc.encode(x, 6).data)


def test_channel_mismatch_raises():
    enc = make_encoder(coils=2)
    with pytest.raises(ShapeError):
        enc.encode(np.zeros((3, 12, 12)), scale=4)


def test_scale_must_be_positive():
    enc = make_encoder()
    with pytest.raises(ValidationError):
        enc.encode(np.zeros((2, 12, 12)), scale=0)


def test_scale_feature_normalization_anchor():
    assert scale_feature(4) == 1.0
    assert scale_feature(6) == 1.5


def test_scale_bias_zero_projection_gives_zero_vector():
    block = ResidualBlock(channels=16, groups=4, scale_embedding=True, dtype=torch.float64)
    with torch.no_grad():
        block.scale_proj.weight.zero_()
        block.scale_proj.bias.zero_()
    for s in (1, 4, 6):
        assert np.array_equal(block.scale_bias(s), np.zeros(16))


def test_scale_bias_hand_evaluated_linear_map():
    block = ResidualBlock(channels=16, groups=4, scale_embedding=True, dtype=torch.float64)
    with torch.no_grad():
        block.scale_proj.weight.zero_()
        block.scale_proj.bias.zero_()
        block.scale_proj.weight[3, 0] = 1.0
    bias = block.scale_bias(6)
    expected = np.zeros(16)
    expected[3] = 6 / 4  # W * phi(s) with phi(s) = s / 4
    assert bias == pytest.approx(expected, abs=1e-15)


def test_conv_stack_is_translation_equivariant_away_from_borders():
    enc = make_encoder(coils=1)
    rng = np.random.default_rng(5)
    x = np.zeros((1, 1, 24, 24))
    x[0, 0, 8:14, 8:14] = rng.uniform(size=(6, 6))
    shifted = np.roll(x, shift=1, axis=3)
    t = torch.as_tensor(x, dtype=torch.float64)
    t_shift = torch.as_tensor(shifted, dtype=torch.float64)
    with torch.no_grad():
        pre = enc.blocks[0].conv1(enc.input_proj(t))
        pre_shift = enc.blocks[0].conv1(enc.input_proj(t_shift))
    inner = pre[0, :, 4:-4, 4:-4].numpy()
    inner_shift = np.roll(pre_shift[0].numpy(), shift=-1, axis=2)[:, 4:-4, 4:-4]
    assert np.abs(inner - inner_shift).max() < 1e-10


def test_finite_output_for_extreme_finite_input():
    enc = make_encoder()
    x = np.zeros((2, 12, 12))
    x[0] = 1e12
    fm = enc.encode(x, scale=4)
    assert np.all(np.isfinite(fm.data))
    constant = enc.encode(np.zeros((2, 12, 12)), scale=4)
    assert np.all(np.isfinite(constant.data))
