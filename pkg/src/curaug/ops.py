"""The 22-operation augmentation catalog and the strength-to-magnitude grid.

Magnitudes follow a 30-level linear grid between each operation's weakest
and strongest parameter value; grid points are computed in exact rational
arithmetic and rounded to float once, so endpoint and worked-example values
are reproduced exactly.

Pixel math contract (shared with the scalar reference path used to freeze
golden images): channel arithmetic happens in float64 with the exact
expressions written here, is rounded half-to-even once at the end of each
op, and clamped to [0, 255].  Geometric ops inverse-map output pixels to
source coordinates and sample bilinearly; out-of-frame taps read mid-gray
(128, 128, 128).  Convolutions clamp to the edge and accumulate taps in
row-major order.  Ops draw from the supplied Stream in the documented
order, and only where noted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .image import RasterImage
from .rng import Stream

MAGNITUDE_LEVELS = 30
FILL_GRAY = 128.0


class ParamClass(Enum):
    ON_OFF = "on_off"
    RANGED = "ranged"


class OpKind(Enum):
    FLIP = "Flip"
    MIRROR = "Mirror"
    EDGE_ENHANCE = "EdgeEnhance"
    DETAIL = "Detail"
    SMOOTH = "Smooth"
    AUTO_CONTRAST = "AutoContrast"
    EQUALIZE = "Equalize"
    INVERT = "Invert"
    GAUSSIAN_BLUR = "GaussianBlur"
    RESIZE_CROP = "ResizeCrop"
    ROTATE = "Rotate"
    POSTERIZE = "Posterize"
    SOLARIZE = "Solarize"
    SOLARIZE_ADD = "SolarizeAdd"
    COLOR = "Color"
    CONTRAST = "Contrast"
    BRIGHTNESS = "Brightness"
    SHARPNESS = "Sharpness"
    SHEAR_X = "ShearX"
    SHEAR_Y = "ShearY"
    TRANSLATE_X = "TranslateX"
    TRANSLATE_Y = "TranslateY"


@dataclass(frozen=True)
class OpSpec:
    kind: OpKind
    param_class: ParamClass
    weakest: float | None  # parameter value at strength 0 (None for on/off ops)
    strongest: float | None  # parameter value at strength 30
    unit: str


# (kind, weakest, strongest, unit); decimal strings keep the magnitude grid
# exactly rational.  Ranges are oriented so larger strength = stronger effect;
# Solarize therefore runs 256 -> 0.  The enhancement-factor ops walk the full
# published interval [0.1, 1.9]; apply_op folds the walked value into a factor
# pair symmetric about 1.0 (see _enhance_delta).
_TABLE: list[tuple[OpKind, str | None, str | None, str]] = [
    (OpKind.FLIP, None, None, "on/off"),
    (OpKind.MIRROR, None, None, "on/off"),
    (OpKind.EDGE_ENHANCE, None, None, "on/off"),
    (OpKind.DETAIL, None, None, "on/off"),
    (OpKind.SMOOTH, None, None, "on/off"),
    (OpKind.AUTO_CONTRAST, None, None, "on/off"),
    (OpKind.EQUALIZE, None, None, "on/off"),
    (OpKind.INVERT, None, None, "on/off"),
    (OpKind.GAUSSIAN_BLUR, "0", "2", "sigma (pixels)"),
    (OpKind.RESIZE_CROP, "1", "1.3", "scale factor"),
    (OpKind.ROTATE, "0", "30", "degrees"),
    (OpKind.POSTERIZE, "0", "4", "bits removed"),
    (OpKind.SOLARIZE, "256", "0", "threshold"),
    (OpKind.SOLARIZE_ADD, "0", "110", "addend"),
    (OpKind.COLOR, "0.1", "1.9", "factor interval"),
    (OpKind.CONTRAST, "0.1", "1.9", "factor interval"),
    (OpKind.BRIGHTNESS, "0.1", "1.9", "factor interval"),
    (OpKind.SHARPNESS, "0.1", "1.9", "factor interval"),
    (OpKind.SHEAR_X, "0", "0.3", "shear factor"),
    (OpKind.SHEAR_Y, "0", "0.3", "shear factor"),
    (OpKind.TRANSLATE_X, "0", "100", "pixels"),
    (OpKind.TRANSLATE_Y, "0", "100", "pixels"),
]

_CATALOG: tuple[OpSpec, ...] = tuple(
    OpSpec(
        kind=kind,
        param_class=ParamClass.ON_OFF if lo is None else ParamClass.RANGED,
        weakest=None if lo is None else float(Fraction(lo)),
        strongest=None if hi is None else float(Fraction(hi)),
        unit=unit,
    )
    for kind, lo, hi, unit in _TABLE
)

_BOUNDS = {
    kind: (Fraction(lo), Fraction(hi))
    for kind, lo, hi, _ in _TABLE
    if lo is not None
}

_INDEX = {spec.kind: i for i, spec in enumerate(_CATALOG)}


def op_catalog() -> tuple[OpSpec, ...]:
    """All 22 operations in fixed catalog order."""
    return _CATALOG


def op_spec(kind: OpKind) -> OpSpec:
    return _CATALOG[_INDEX[kind]]


def catalog_index(kind: OpKind) -> int:
    return _INDEX[kind]


def kind_at(index: int) -> OpKind:
    return _CATALOG[index].kind


def is_ranged(kind: OpKind) -> bool:
    return kind in _BOUNDS


def magnitude(kind: OpKind, s: int, levels: int = MAGNITUDE_LEVELS) -> float | None:
    """Linear strength-to-parameter map; None for on/off operations."""
    if levels < 1:
        raise ValueError("levels must be positive")
    if not 0 <= s <= levels:
        raise ValueError(f"strength {s} outside [0, {levels}]")
    if kind not in _BOUNDS:
        return None
    lo, hi = _BOUNDS[kind]
    return float(lo + (hi - lo) * Fraction(int(s), levels))


# --- shared low-level helpers -------------------------------------------------


def _round_u8(arr: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(arr), 0.0, 255.0).astype(np.uint8)


def _apply_lut(arr: np.ndarray, lut: list[int]) -> np.ndarray:
    return np.take(np.asarray(lut, dtype=np.uint8), arr)


def _bilinear(arr_f: np.ndarray, sx: np.ndarray, sy: np.ndarray, fill: float | None) -> np.ndarray:
    """Sample (h, w, 3) float image at per-pixel source coords.

    fill=None clamps to the edge; otherwise out-of-frame taps read fill.
    """
    h, w = arr_f.shape[:2]
    x0 = np.floor(sx)
    y0 = np.floor(sy)
    fx = (sx - x0)[..., None]
    fy = (sy - y0)[..., None]
    x0i = x0.astype(np.int64)
    y0i = y0.astype(np.int64)

    def tap(xi, yi):
        xc = np.clip(xi, 0, w - 1)
        yc = np.clip(yi, 0, h - 1)
        vals = arr_f[yc, xc]
        if fill is None:
            return vals
        inside = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
        return np.where(inside[..., None], vals, fill)

    v00 = tap(x0i, y0i)
    v10 = tap(x0i + 1, y0i)
    v01 = tap(x0i, y0i + 1)
    v11 = tap(x0i + 1, y0i + 1)
    top = v00 * (1.0 - fx) + v10 * fx
    bot = v01 * (1.0 - fx) + v11 * fx
    return top * (1.0 - fy) + bot * fy


def _grid(w: int, h: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.arange(w, dtype=np.float64)[None, :]
    y = np.arange(h, dtype=np.float64)[:, None]
    return np.broadcast_to(x, (h, w)), np.broadcast_to(y, (h, w))


def _convolve3(arr: np.ndarray, kernel: list[list[float]], divisor: float) -> np.ndarray:
    """3x3 convolution, clamp-to-edge, float64 result before rounding."""
    h, w = arr.shape[:2]
    arr_f = arr.astype(np.float64)
    up = np.arange(-1, h - 1).clip(0, h - 1)
    down = np.arange(1, h + 1).clip(0, h - 1)
    left = np.arange(-1, w - 1).clip(0, w - 1)
    right = np.arange(1, w + 1).clip(0, w - 1)
    rows = {-1: arr_f[up], 0: arr_f, 1: arr_f[down]}
    acc = np.zeros_like(arr_f)
    for dy in (-1, 0, 1):
        row = rows[dy]
        for dx in (-1, 0, 1):
            weight = kernel[dy + 1][dx + 1]
            if weight == 0.0:
                continue
            if dx == -1:
                shifted = row[:, left]
            elif dx == 1:
                shifted = row[:, right]
            else:
                shifted = row
            acc = acc + weight * shifted
    return acc / divisor


_SMOOTH_KERNEL = [[1.0, 1.0, 1.0], [1.0, 5.0, 1.0], [1.0, 1.0, 1.0]]
_DETAIL_KERNEL = [[0.0, -1.0, 0.0], [-1.0, 10.0, -1.0], [0.0, -1.0, 0.0]]
_EDGE_ENHANCE_KERNEL = [[-1.0, -1.0, -1.0], [-1.0, 10.0, -1.0], [-1.0, -1.0, -1.0]]


def _smooth_float(arr: np.ndarray) -> np.ndarray:
    return _convolve3(arr, _SMOOTH_KERNEL, 13.0)


def _luma(arr_f3: np.ndarray) -> np.ndarray:
    r = arr_f3[..., 0]
    g = arr_f3[..., 1]
    b = arr_f3[..., 2]
    return (299.0 * r + 587.0 * g + 114.0 * b) / 1000.0


def _gaussian_weights(sigma: float) -> list[float]:
    radius = math.ceil(3.0 * sigma)
    denom = 2.0 * sigma * sigma
    raw = [math.exp(-(float(i * i)) / denom) for i in range(-radius, radius + 1)]
    total = 0.0
    for v in raw:
        total = total + v
    return [v / total for v in raw]


def _enhance_delta(kind: OpKind, m: float) -> float:
    # m walks [0.1, 1.9]; the applied factor pair is 1 +- delta with
    # delta = (m - 0.1) / 2, spanning the full interval at max strength.
    lo, _ = _BOUNDS[kind]
    return (m - float(lo)) / 2.0


def _enhance_factor(kind: OpKind, m: float, rng: Stream) -> float:
    delta = _enhance_delta(kind, m)
    u = rng.random()
    return 1.0 + delta if u < 0.5 else 1.0 - delta


# --- the 22 operations --------------------------------------------------------


def _op_flip(img, m, rng):
    return RasterImage(img.array[::-1].copy())


def _op_mirror(img, m, rng):
    return RasterImage(img.array[:, ::-1].copy())


def _op_edge_enhance(img, m, rng):
    return RasterImage(_round_u8(_convolve3(img.array, _EDGE_ENHANCE_KERNEL, 2.0)))


def _op_detail(img, m, rng):
    return RasterImage(_round_u8(_convolve3(img.array, _DETAIL_KERNEL, 6.0)))


def _op_smooth(img, m, rng):
    return RasterImage(_round_u8(_smooth_float(img.array)))


def _op_auto_contrast(img, m, rng):
    arr = img.array
    out = np.empty_like(arr)
    for c in range(3):
        chan = arr[..., c]
        lo = int(chan.min())
        hi = int(chan.max())
        if hi <= lo:
            out[..., c] = chan
            continue
        scale = 255.0 / (hi - lo)
        lut = [max(0, min(255, round((v - lo) * scale))) for v in range(256)]
        out[..., c] = _apply_lut(chan, lut)
    return RasterImage(out)


def _op_equalize(img, m, rng):
    arr = img.array
    out = np.empty_like(arr)
    for c in range(3):
        chan = arr[..., c]
        hist = np.bincount(chan.reshape(-1), minlength=256).tolist()
        nonzero = [v for v in hist if v]
        if len(nonzero) <= 1:
            out[..., c] = chan
            continue
        step = (sum(hist) - nonzero[-1]) // 255
        if step == 0:
            out[..., c] = chan
            continue
        lut = []
        n = step // 2
        for i in range(256):
            lut.append(min(n // step, 255))
            n += hist[i]
        out[..., c] = _apply_lut(chan, lut)
    return RasterImage(out)


def _op_invert(img, m, rng):
    return RasterImage((255 - img.array.astype(np.int16)).astype(np.uint8))


def _op_gaussian_blur(img, m, rng):
    sigma = float(m)
    if sigma <= 0.0:
        return RasterImage(img.array.copy())
    weights = _gaussian_weights(sigma)
    radius = (len(weights) - 1) // 2
    h, w = img.height, img.width
    arr = img.array.astype(np.float64)
    # horizontal then vertical pass; intermediate stays float
    acc = np.zeros_like(arr)
    for off, weight in zip(range(-radius, radius + 1), weights):
        idx = np.clip(np.arange(w) + off, 0, w - 1)
        acc = acc + weight * arr[:, idx]
    mid = acc
    acc = np.zeros_like(arr)
    for off, weight in zip(range(-radius, radius + 1), weights):
        idx = np.clip(np.arange(h) + off, 0, h - 1)
        acc = acc + weight * mid[idx]
    return RasterImage(_round_u8(acc))


def _op_resize_crop(img, m, rng):
    h, w = img.height, img.width
    scale = float(m)
    sw = max(w, int(round(w * scale)))
    sh = max(h, int(round(h * scale)))
    ox = rng.randint(sw - w + 1)
    oy = rng.randint(sh - h + 1)
    rx = w / sw
    ry = h / sh
    x, y = _grid(w, h)
    sx = (x + (ox + 0.5)) * rx - 0.5
    sy = (y + (oy + 0.5)) * ry - 0.5
    return RasterImage(_round_u8(_bilinear(img.array.astype(np.float64), sx, sy, fill=None)))


def _op_rotate(img, m, rng):
    h, w = img.height, img.width
    theta = math.radians(float(m))
    cos_a = math.cos(theta)
    sin_a = math.sin(theta)
    cx = (w - 1) / 2.0
    cy = (h - 1) / 2.0
    x, y = _grid(w, h)
    dx = x - cx
    dy = y - cy
    sx = cos_a * dx - sin_a * dy + cx
    sy = sin_a * dx + cos_a * dy + cy
    return RasterImage(_round_u8(_bilinear(img.array.astype(np.float64), sx, sy, fill=FILL_GRAY)))


def _op_posterize(img, m, rng):
    bits = max(0, min(8, round(float(m))))
    mask = (0xFF << bits) & 0xFF
    lut = [v & mask for v in range(256)]
    return RasterImage(_apply_lut(img.array, lut))


def _op_solarize(img, m, rng):
    threshold = float(m)
    lut = [255 - v if v >= threshold else v for v in range(256)]
    return RasterImage(_apply_lut(img.array, lut))


def _op_solarize_add(img, m, rng):
    addend = float(m)
    lut = [
        max(0, min(255, round(v + addend))) if v < 128 else v for v in range(256)
    ]
    return RasterImage(_apply_lut(img.array, lut))


def _op_color(img, m, rng):
    f = _enhance_factor(OpKind.COLOR, m, rng)
    arr = img.array.astype(np.float64)
    gray = _luma(arr)[..., None]
    return RasterImage(_round_u8(gray + f * (arr - gray)))


def _op_contrast(img, m, rng):
    f = _enhance_factor(OpKind.CONTRAST, m, rng)
    arr64 = img.array.astype(np.int64)
    total = int((299 * arr64[..., 0] + 587 * arr64[..., 1] + 114 * arr64[..., 2]).sum())
    mean = total / (1000.0 * (img.width * img.height))
    arr = img.array.astype(np.float64)
    return RasterImage(_round_u8(mean + f * (arr - mean)))


def _op_brightness(img, m, rng):
    f = _enhance_factor(OpKind.BRIGHTNESS, m, rng)
    lut = [max(0, min(255, round(f * v))) for v in range(256)]
    return RasterImage(_apply_lut(img.array, lut))


def _op_sharpness(img, m, rng):
    f = _enhance_factor(OpKind.SHARPNESS, m, rng)
    arr = img.array.astype(np.float64)
    smooth = _smooth_float(img.array)
    return RasterImage(_round_u8(smooth + f * (arr - smooth)))


def _op_shear_x(img, m, rng):
    h, w = img.height, img.width
    factor = float(m)
    x, y = _grid(w, h)
    sx = x - factor * y
    return RasterImage(_round_u8(_bilinear(img.array.astype(np.float64), sx, y, fill=FILL_GRAY)))


def _op_shear_y(img, m, rng):
    h, w = img.height, img.width
    factor = float(m)
    x, y = _grid(w, h)
    sy = y - factor * x
    return RasterImage(_round_u8(_bilinear(img.array.astype(np.float64), x, sy, fill=FILL_GRAY)))


def _op_translate_x(img, m, rng):
    h, w = img.height, img.width
    shift = min(float(m), float(w - 1))
    x, y = _grid(w, h)
    sx = x - shift
    return RasterImage(_round_u8(_bilinear(img.array.astype(np.float64), sx, y, fill=FILL_GRAY)))


def _op_translate_y(img, m, rng):
    h, w = img.height, img.width
    shift = min(float(m), float(h - 1))
    x, y = _grid(w, h)
    sy = y - shift
    return RasterImage(_round_u8(_bilinear(img.array.astype(np.float64), x, sy, fill=FILL_GRAY)))


_IMPL = {
    OpKind.FLIP: _op_flip,
    OpKind.MIRROR: _op_mirror,
    OpKind.EDGE_ENHANCE: _op_edge_enhance,
    OpKind.DETAIL: _op_detail,
    OpKind.SMOOTH: _op_smooth,
    OpKind.AUTO_CONTRAST: _op_auto_contrast,
    OpKind.EQUALIZE: _op_equalize,
    OpKind.INVERT: _op_invert,
    OpKind.GAUSSIAN_BLUR: _op_gaussian_blur,
    OpKind.RESIZE_CROP: _op_resize_crop,
    OpKind.ROTATE: _op_rotate,
    OpKind.POSTERIZE: _op_posterize,
    OpKind.SOLARIZE: _op_solarize,
    OpKind.SOLARIZE_ADD: _op_solarize_add,
    OpKind.COLOR: _op_color,
    OpKind.CONTRAST: _op_contrast,
    OpKind.BRIGHTNESS: _op_brightness,
    OpKind.SHARPNESS: _op_sharpness,
    OpKind.SHEAR_X: _op_shear_x,
    OpKind.SHEAR_Y: _op_shear_y,
    OpKind.TRANSLATE_X: _op_translate_x,
    OpKind.TRANSLATE_Y: _op_translate_y,
}


def apply_op(img: RasterImage, kind: OpKind, m: float | None, rng: Stream) -> RasterImage:
    """Apply one operation at magnitude m.

    Stream consumption: Color/Contrast/Brightness/Sharpness draw one uniform
    (factor sign); ResizeCrop draws two ints (x offset, then y); all other
    ops draw nothing.
    """
    if kind in _BOUNDS:
        if m is None:
            raise ValueError(f"{kind.value} requires a magnitude")
        lo, hi = _BOUNDS[kind]
        low, high = (float(lo), float(hi)) if lo <= hi else (float(hi), float(lo))
        if not (low - 1e-9 <= float(m) <= high + 1e-9):
            raise ValueError(f"magnitude {m} outside [{low}, {high}] for {kind.value}")
    return _IMPL[kind](img, m, rng)
