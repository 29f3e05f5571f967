import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwtmark.errors import (
    ChannelMismatchError,
    ImageDecodeError,
    ImageIOError,
    ShapeMismatchError,
    UnsupportedFormatError,
)
from fwtmark.image import (
    RasterImage,
    YCbCrPlanes,
    load_image,
    luminance,
    rgb_to_ycbcr,
    save_image,
    split_planes,
    ycbcr_to_rgb,
)


def pixel(r, g, b):
    return RasterImage(np.array([[[r, g, b]]], dtype=np.uint8))


def planes(y, cb, cr):
    return YCbCrPlanes(np.array([[y]], float), np.array([[cb]], float), np.array([[cr]], float))


def test_raster_invariants():
    img = RasterImage(np.zeros((4, 5, 3), np.uint8))
    assert (img.width, img.height, img.channels) == (5, 4, 3)
    assert img.data.size == img.width * img.height * img.channels
    assert not img.data.flags.writeable
    assert RasterImage(np.zeros((4, 5), np.uint8)).channels == 1
    with pytest.raises(ChannelMismatchError):
        RasterImage(np.zeros((4, 5, 2), np.uint8))
    with pytest.raises(ValueError):
        RasterImage(np.full((2, 2), 300))


def test_raster_does_not_freeze_caller_array():
    arr = np.zeros((3, 3), np.uint8)
    RasterImage(arr)
    arr[0, 0] = 1


@pytest.mark.parametrize(
    "rgb, y",
    [((255, 255, 255), 255), ((0, 0, 0), 0), ((255, 0, 0), 76)],
)
def test_luma_examples(rgb, y):
    assert rgb_to_ycbcr(pixel(*rgb)).y[0, 0] == y


def test_black_has_neutral_chroma():
    p = rgb_to_ycbcr(pixel(0, 0, 0))
    assert p.cb[0, 0] == 128 and p.cr[0, 0] == 128


def test_rgb_to_ycbcr_rejects_grayscale():
    with pytest.raises(ChannelMismatchError, match="channel mismatch"):
        rgb_to_ycbcr(RasterImage(np.zeros((2, 2), np.uint8)))


@pytest.mark.parametrize("y, rgb", [(255, (255, 255, 255)), (0, (0, 0, 0))])
def test_ycbcr_to_rgb_neutral(y, rgb):
    assert tuple(ycbcr_to_rgb(planes(y, 128, 128)).data[0, 0]) == rgb


def test_ycbcr_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        YCbCrPlanes(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))


def _cube(step=3):
    v = np.arange(0, 256, step)
    r, g, b = np.meshgrid(v, v, v, indexing="ij")
    return np.stack([r, g, b], -1).reshape(-1, len(v), 3).astype(np.uint8)


def test_roundtrip_sweep_within_one_level():
    cube = _cube()
    back = ycbcr_to_rgb(rgb_to_ycbcr(RasterImage(cube))).data
    assert np.abs(back.astype(int) - cube).max() <= 1


def test_luma_is_rounded_weighted_sum():
    cube = _cube(5).astype(float)
    exact = 0.299 * cube[..., 0] + 0.587 * cube[..., 1] + 0.114 * cube[..., 2]
    y = rgb_to_ycbcr(RasterImage(cube.astype(np.uint8))).y
    assert np.abs(y - exact).max() <= 0.5
    assert np.all(y == np.round(y))


def test_planes_in_range_before_embedding():
    p = rgb_to_ycbcr(RasterImage(_cube(15)))
    for plane in (p.y, p.cb, p.cr):
        assert plane.min() >= 0 and plane.max() <= 255


@given(st.tuples(*[st.integers(0, 255)] * 3))
@settings(max_examples=300, deadline=None)
def test_roundtrip_property(rgb):
    back = ycbcr_to_rgb(rgb_to_ycbcr(pixel(*rgb))).data[0, 0]
    assert np.abs(back.astype(int) - np.array(rgb)).max() <= 1


def test_grayscale_split_is_identity():
    gray = RasterImage(np.arange(16, dtype=np.uint8).reshape(4, 4))
    p = split_planes(gray)
    assert np.array_equal(p.y, gray.pixels) and np.all(p.cb == 128)
    assert np.array_equal(luminance(gray), gray.pixels)


@pytest.mark.parametrize("ext", [".png", ".bmp"])
def test_lossless_roundtrip(tmp_path, rng, ext):
    img = RasterImage(rng.integers(0, 256, (16, 16, 3), dtype=np.uint8))
    save_image(img, tmp_path / f"x{ext}")
    loaded = load_image(tmp_path / f"x{ext}")
    assert loaded.channels == 3
    assert loaded == img


def test_grayscale_png_roundtrip(tmp_path, rng):
    img = RasterImage(rng.integers(0, 256, (9, 7), dtype=np.uint8))
    save_image(img, tmp_path / "g.png")
    assert load_image(tmp_path / "g.png") == img


def test_jpeg_write_uses_quality(tmp_path, rng):
    img = RasterImage(rng.integers(0, 256, (32, 32, 3), dtype=np.uint8))
    save_image(img, tmp_path / "lo.jpg", quality=10)
    save_image(img, tmp_path / "hi.jpg", quality=95)
    assert (tmp_path / "lo.jpg").stat().st_size < (tmp_path / "hi.jpg").stat().st_size
    assert load_image(tmp_path / "lo.jpg").shape == (32, 32)


def test_alpha_is_stripped_with_warning(tmp_path):
    from PIL import Image

    Image.new("RGBA", (4, 4), (10, 20, 30, 40)).save(tmp_path / "a.png")
    with pytest.warns(UserWarning, match="alpha"):
        img = load_image(tmp_path / "a.png")
    assert img.channels == 3 and tuple(img.data[0, 0]) == (10, 20, 30)


def test_io_errors_are_distinct(tmp_path):
    with pytest.raises(ImageIOError) as missing:
        load_image(tmp_path / "missing.png")
    assert type(missing.value) is ImageIOError
    with pytest.raises(UnsupportedFormatError):
        load_image(tmp_path / "x.tiff")
    (tmp_path / "junk.png").write_bytes(b"not an image")
    with pytest.raises(ImageDecodeError):
        load_image(tmp_path / "junk.png")
