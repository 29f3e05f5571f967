import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwtmark.errors import ParameterError, WatermarkTooLargeError
from fwtmark.image import RasterImage
from fwtmark.qim import EmbedConfig, WatermarkBits, binarize, embed_bit, extract_bit, is_binary_image


@pytest.mark.parametrize(
    "c, b, alpha, want", [(100, 1, 30, 115), (100, 0, 30, 85), (-7.25, 1, 25, 5.25)]
)
def test_embed_examples(c, b, alpha, want):
    assert embed_bit(c, b, alpha) == want


@pytest.mark.parametrize("marked, original, bit", [(115, 100, 1), (85, 100, 0), (100, 100, 1)])
def test_extract_examples(marked, original, bit):
    assert extract_bit(marked, original) == bit


def test_binarize_threshold_is_inclusive():
    wm = RasterImage(np.array([[128, 127], [255, 0]], np.uint8))
    assert np.array_equal(binarize(wm, 128).bits, [[1, 0], [1, 0]])
    assert np.all(binarize(RasterImage(np.full((8, 8), 255, np.uint8))).bits == 1)


def test_binarize_rgb_uses_luma():
    # luma of pure red is 76
    red = RasterImage(np.tile(np.array([255, 0, 0], np.uint8), (2, 2, 1)))
    assert binarize(red, 76).bits.all()
    assert not binarize(red, 77).bits.any()


def test_size_limit():
    binarize(RasterImage(np.zeros((128, 128), np.uint8)))
    with pytest.raises(WatermarkTooLargeError, match="watermark too large"):
        binarize(RasterImage(np.zeros((129, 10), np.uint8)))
    with pytest.raises(WatermarkTooLargeError):
        WatermarkBits(np.zeros((10, 200), np.uint8))


def test_bits_validation():
    with pytest.raises(ParameterError):
        WatermarkBits(np.array([[0, 2]]))
    bits = WatermarkBits(np.array([[0, 1]]))
    assert not bits.bits.flags.writeable
    assert np.array_equal(bits.render().pixels, [[0, 255]])


def test_config_validation():
    with pytest.raises(ParameterError):
        EmbedConfig(alpha=0)
    with pytest.raises(ParameterError):
        EmbedConfig(alpha=10, threshold=0)
    with pytest.raises(ParameterError):
        embed_bit(1.0, 1, -1.0)


def test_binary_detection(qr, logo):
    assert is_binary_image(qr)
    assert not is_binary_image(logo)


def test_dense_grid_round_trip():
    c = np.linspace(-1000, 1000, 200_001)
    for alpha in (0.01, 1, 10, 25, 30, 60, 90):
        for b in (0, 1):
            marked = embed_bit(c, np.full_like(c, b), alpha)
            assert np.allclose(np.abs(marked - c), alpha / 2)
            assert np.all(extract_bit(marked, c) == b)


@given(
    c=st.floats(-1e4, 1e4),
    b=st.integers(0, 1),
    alpha=st.floats(0.1, 200),
    frac=st.floats(-0.999, 0.999),
)
@settings(max_examples=500)
def test_noise_margin(c, b, alpha, frac):
    eps = frac * alpha / 2
    assert extract_bit(embed_bit(c, b, alpha) + eps, c) == b
