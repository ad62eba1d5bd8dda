"""8-bit RGB raster images, the value type every augmentation acts on."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image


@dataclass(frozen=True, eq=False)
class RasterImage:
    """An immutable (height, width, 3) uint8 pixel grid, row-major."""

    array: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.array)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (h, w, 3) array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("images must be at least 1x1")
        if arr.dtype != np.uint8:
            raise ValueError(f"expected uint8 channels, got {arr.dtype}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "array", arr)

    @property
    def width(self) -> int:
        return self.array.shape[1]

    @property
    def height(self) -> int:
        return self.array.shape[0]

    @property
    def pixels(self) -> list[tuple[int, int, int]]:
        """Row-major (r, g, b) triples. Intended for small images and tests."""
        flat = self.array.reshape(-1, 3)
        return [tuple(int(c) for c in px) for px in flat]

    def tobytes(self) -> bytes:
        return self.array.tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.array.shape == other.array.shape and bool(
            np.array_equal(self.array, other.array)
        )

    def __hash__(self):
        return hash((self.array.shape, self.array.tobytes()))

    @classmethod
    def from_pixels(cls, width: int, height: int, pixels) -> "RasterImage":
        flat = np.asarray(pixels, dtype=np.int64)
        if flat.shape != (width * height, 3):
            raise ValueError(
                f"pixels length {flat.shape} does not match {width}x{height} grid"
            )
        if flat.min() < 0 or flat.max() > 255:
            raise ValueError("channel values must lie in [0, 255]")
        return cls(flat.reshape(height, width, 3).astype(np.uint8))

    @classmethod
    def filled(cls, width: int, height: int, rgb: tuple[int, int, int]) -> "RasterImage":
        arr = np.empty((height, width, 3), dtype=np.uint8)
        arr[:, :] = rgb
        return cls(arr)


def random_image(width: int, height: int, rng) -> RasterImage:
    """Uniformly random pixels from a Stream; used by tests and fixtures."""
    vals = rng.randints(width * height * 3, 256).astype(np.uint8)
    return RasterImage(vals.reshape(height, width, 3))


def to_png_bytes(img: RasterImage) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(img.array, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def from_png_bytes(data: bytes) -> RasterImage:
    with Image.open(io.BytesIO(data)) as im:
        return RasterImage(np.asarray(im.convert("RGB"), dtype=np.uint8))


def load_png(path) -> RasterImage:
    with Image.open(path) as im:
        return RasterImage(np.asarray(im.convert("RGB"), dtype=np.uint8))


def save_png(img: RasterImage, path) -> None:
    Image.fromarray(img.array, mode="RGB").save(path, format="PNG")
