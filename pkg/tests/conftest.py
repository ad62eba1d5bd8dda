import numpy as np
import pytest

from curaug.image import RasterImage, random_image
from curaug.rng import Stream


@pytest.fixture
def small_image() -> RasterImage:
    return random_image(13, 9, Stream("fixtures", 1))


def image_batch(n: int, w: int = 12, h: int = 10, tag: int = 0) -> list[RasterImage]:
    return [random_image(w, h, Stream("batch", tag, i)) for i in range(n)]


def as_int(img: RasterImage) -> np.ndarray:
    return img.array.astype(np.int64)
