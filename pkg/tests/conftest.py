import numpy as np
import pytest

from fwtmark.image import RasterImage
from fwtmark.pipeline import resolve_defaults
from fwtmark.samples import gray_logo, qr_like, synthetic_host

skdata = pytest.importorskip("skimage.data")

# 512x512 photographs shipped with scikit-image (no download needed).
NATURAL_HOSTS = {
    "camera": skdata.camera,
    "moon": skdata.moon,
    "immunohistochemistry": skdata.immunohistochemistry,
    "brick": skdata.brick,
}


@pytest.fixture(scope="session")
def natural_hosts():
    return {name: RasterImage(load()) for name, load in NATURAL_HOSTS.items()}


@pytest.fixture(scope="session")
def camera(natural_hosts):
    return natural_hosts["camera"]


@pytest.fixture(scope="session")
def rgb_host():
    return synthetic_host(512, 512, seed=7)


@pytest.fixture(scope="session")
def qr():
    return qr_like(64, seed=0)


@pytest.fixture(scope="session")
def logo():
    return gray_logo(64)


@pytest.fixture(scope="session")
def qr_config():
    return resolve_defaults((512, 512), (64, 64))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
