"""Image container, bicubic resampling, luminance conversion, and file I/O.

Pixels are kept as real values in [0, 1]; 8-bit integers appear only at
the file boundary. All operations here are pure: they never modify their
inputs and are safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    ChannelMismatchError,
    CorruptFileError,
    ImageIOError,
    InvalidDimensionError,
    NonFiniteInputError,
    UnsupportedFormatError,
)

# BT.601 studio-swing luminance weights for [0,1] RGB, the SR-community
# convention for Y-channel evaluation.
_Y_COEFF = (65.481, 128.553, 24.966)
_Y_OFFSET = 16.0


class BoundaryPolicy(Enum):
    """How resampling reads pixels beyond the image border."""

    CLAMP = "clamp"
    REFLECT = "reflect"


@dataclass(frozen=True)
class Image:
    """A planar raster: float64 array of shape (height, width, channels).

    Values are finite and lie in [0, 1]; channels is 1 (gray) or 3 (RGB).
    Treat instances as immutable.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3:
            raise InvalidDimensionError(
                f"image data must be 2-D or 3-D, got ndim={arr.ndim}"
            )
        h, w, c = arr.shape
        if h < 1 or w < 1:
            raise InvalidDimensionError(f"image has empty extent {h}x{w}")
        if c not in (1, 3):
            raise ChannelMismatchError(f"channels must be 1 or 3, got {c}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteInputError("image data contains NaN or infinity")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("image values must lie in [0, 1]")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


def as_image(arr, clip: bool = False) -> Image:
    """Coerce an array-like (or Image) to an Image.

    uint8 arrays are rescaled by 1/255. With ``clip=True``, float values are
    clamped into [0, 1] instead of rejected (useful for raw accumulator
    output); non-finite values are always rejected.
    """
    if isinstance(arr, Image):
        return arr
    a = np.asarray(arr)
    if a.dtype == np.uint8:
        a = a.astype(np.float64) / 255.0
    else:
        a = a.astype(np.float64)
    if clip and a.size and np.all(np.isfinite(a)):
        a = np.clip(a, 0.0, 1.0)
    return Image(a)


def new_image(height: int, width: int, channels: int, fill: float = 0.0) -> Image:
    return Image(np.full((height, width, channels), fill, dtype=np.float64))


# ---------------------------------------------------------------------------
# Bicubic resampling
# ---------------------------------------------------------------------------

def _cubic_kernel(x: np.ndarray) -> np.ndarray:
    """Keys cubic kernel with a = -0.5 (Catmull-Rom)."""
    ax = np.abs(x)
    ax2 = ax * ax
    ax3 = ax2 * ax
    inner = 1.5 * ax3 - 2.5 * ax2 + 1.0
    outer = -0.5 * (ax3 - 5.0 * ax2 + 8.0 * ax - 4.0)
    return np.where(ax <= 1.0, inner, np.where(ax < 2.0, outer, 0.0))


def _map_border(idx: np.ndarray, n: int, boundary: BoundaryPolicy) -> np.ndarray:
    if boundary is BoundaryPolicy.CLAMP:
        return np.clip(idx, 0, n - 1)
    # reflect: mirror about the border without repeating the edge sample
    if n == 1:
        return np.zeros_like(idx)
    m = n - 1
    j = np.abs(idx) % (2 * m)
    return np.where(j > m, 2 * m - j, j)


def _resample_weights(n_in: int, n_out: int, boundary: BoundaryPolicy):
    """Tap indices and normalized weights for one axis.

    When minifying, the kernel is widened by the scale factor so it acts as
    an antialiasing low-pass, matching the convention used to prepare LR
    inputs throughout the SR literature.
    """
    ratio = n_out / n_in
    src = (np.arange(n_out, dtype=np.float64) + 0.5) / ratio - 0.5
    width = max(1.0, 1.0 / ratio)  # kernel stretch for minification
    support = 2.0 * width
    n_taps = int(math.ceil(2.0 * support)) + 2
    left = np.floor(src - support).astype(np.int64) + 1
    idx = left[:, None] + np.arange(n_taps)[None, :]
    w = _cubic_kernel((src[:, None] - idx) / width)
    w /= w.sum(axis=1, keepdims=True)
    return _map_border(idx, n_in, boundary), w


def _resample_axis(data: np.ndarray, n_out: int, axis: int,
                   boundary: BoundaryPolicy) -> np.ndarray:
    idx, w = _resample_weights(data.shape[axis], n_out, boundary)
    moved = np.moveaxis(data, axis, 0)
    gathered = moved[idx]                      # (n_out, taps, ...)
    out = np.einsum("ot,ot...->o...", w, gathered)
    return np.moveaxis(out, 0, axis)


def bicubic_resample(img: Image, scale: float,
                     boundary: BoundaryPolicy = BoundaryPolicy.REFLECT) -> Image:
    """Resample by a uniform scale factor with the a=-0.5 cubic kernel.

    Output dimensions are round(input * scale). Rows and columns are
    resampled separably; the result equals direct 2-D kernel evaluation to
    within accumulation error. Output is clamped to [0, 1].
    """
    if not (scale > 0.0) or not math.isfinite(scale):
        raise InvalidDimensionError(f"scale must be a positive real, got {scale}")
    h_out = int(math.floor(img.height * scale + 0.5))
    w_out = int(math.floor(img.width * scale + 0.5))
    if h_out < 1 or w_out < 1:
        raise InvalidDimensionError(
            f"scale {scale} on {img.height}x{img.width} yields empty output"
        )
    out = _resample_axis(img.data, h_out, 0, boundary)
    out = _resample_axis(out, w_out, 1, boundary)
    return Image(np.clip(out, 0.0, 1.0))


# ---------------------------------------------------------------------------
# Color
# ---------------------------------------------------------------------------

def rgb_to_y(img: Image) -> Image:
    """Luminance (Y of YCbCr, BT.601 studio swing) of a 3-channel image.

    For inputs in [0,1] the output lies in [16/255, 235/255]; the map is
    affine, so no clamping is ever applied.
    """
    if img.channels != 3:
        raise ChannelMismatchError(
            f"rgb_to_y needs a 3-channel image, got {img.channels}"
        )
    r, g, b = img.data[:, :, 0], img.data[:, :, 1], img.data[:, :, 2]
    y = (_Y_OFFSET + _Y_COEFF[0] * r + _Y_COEFF[1] * g + _Y_COEFF[2] * b) / 255.0
    return Image(y)


def luminance(img: Image) -> Image:
    """Y channel of an image; 1-channel inputs pass through unchanged."""
    return img if img.channels == 1 else rgb_to_y(img)


# ---------------------------------------------------------------------------
# File I/O: 8-bit PNG and binary PPM/PGM
# ---------------------------------------------------------------------------

def _to_u8(img: Image) -> np.ndarray:
    return np.floor(img.data * 255.0 + 0.5).astype(np.uint8)


def _suffix(path) -> str:
    return Path(path).suffix.lower()


def load_image(path) -> Image:
    """Load an 8-bit PNG, PPM, or PGM file as an Image."""
    path = Path(path)
    suffix = _suffix(path)
    if suffix == ".png":
        return _load_png(path)
    if suffix in (".ppm", ".pgm"):
        return _load_pnm(path)
    raise UnsupportedFormatError(f"unsupported image format: {path.name}")


def save_image(img: Image, path) -> None:
    """Write an Image as 8-bit PNG, PPM (3-channel), or PGM (1-channel)."""
    path = Path(path)
    suffix = _suffix(path)
    if suffix == ".png":
        _save_png(img, path)
    elif suffix == ".ppm":
        if img.channels != 3:
            raise ChannelMismatchError("PPM requires a 3-channel image")
        _save_pnm(img, path)
    elif suffix == ".pgm":
        if img.channels != 1:
            raise ChannelMismatchError("PGM requires a 1-channel image")
        _save_pnm(img, path)
    else:
        raise UnsupportedFormatError(f"unsupported image format: {path.name}")


def _load_png(path: Path) -> Image:
    from PIL import Image as PILImage, UnidentifiedImageError

    try:
        with PILImage.open(path) as im:
            if im.mode not in ("L", "RGB"):
                raise UnsupportedFormatError(
                    f"PNG mode {im.mode!r} not supported (need 8-bit L or RGB)"
                )
            arr = np.asarray(im, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise CorruptFileError(f"not a readable PNG file: {path}") from exc
    except FileNotFoundError as exc:
        raise ImageIOError(f"cannot read {path}: {exc}") from exc
    except (OSError, SyntaxError) as exc:
        if isinstance(exc, ImageIOError):
            raise
        raise CorruptFileError(f"corrupt PNG file {path}: {exc}") from exc
    return Image(arr.astype(np.float64) / 255.0)


def _save_png(img: Image, path: Path) -> None:
    from PIL import Image as PILImage

    u8 = _to_u8(img)
    if img.channels == 1:
        pil = PILImage.fromarray(u8[:, :, 0], mode="L")
    else:
        pil = PILImage.fromarray(u8, mode="RGB")
    try:
        pil.save(path, format="PNG")
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc


def _read_pnm_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    # skip whitespace and '#' comment lines between header tokens
    while pos < len(buf):
        ch = buf[pos:pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            while pos < len(buf) and buf[pos:pos + 1] != b"\n":
                pos += 1
        else:
            break
    start = pos
    while pos < len(buf) and not buf[pos:pos + 1].isspace():
        pos += 1
    if start == pos:
        raise CorruptFileError("truncated PNM header")
    return buf[start:pos], pos


def _load_pnm(path: Path) -> Image:
    try:
        buf = path.read_bytes()
    except FileNotFoundError as exc:
        raise ImageIOError(f"cannot read {path}: {exc}") from exc
    except OSError as exc:
        raise ImageIOError(f"cannot read {path}: {exc}") from exc
    try:
        magic, pos = _read_pnm_token(buf, 0)
        if magic not in (b"P5", b"P6"):
            raise UnsupportedFormatError(
                f"unsupported PNM magic {magic!r} (need binary P5/P6)"
            )
        w_tok, pos = _read_pnm_token(buf, pos)
        h_tok, pos = _read_pnm_token(buf, pos)
        max_tok, pos = _read_pnm_token(buf, pos)
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except ValueError as exc:
        raise CorruptFileError(f"malformed PNM header in {path}") from exc
    if maxval != 255:
        raise UnsupportedFormatError(f"only maxval 255 PNM supported, got {maxval}")
    if width < 1 or height < 1:
        raise CorruptFileError(f"bad PNM dimensions {width}x{height} in {path}")
    channels = 3 if magic == b"P6" else 1
    pos += 1  # single whitespace byte after maxval
    payload = buf[pos:pos + width * height * channels]
    if len(payload) != width * height * channels:
        raise CorruptFileError(f"truncated PNM payload in {path}")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return Image(arr.astype(np.float64) / 255.0)


def _save_pnm(img: Image, path: Path) -> None:
    magic = b"P6" if img.channels == 3 else b"P5"
    header = magic + b"\n%d %d\n255\n" % (img.width, img.height)
    try:
        path.write_bytes(header + _to_u8(img).tobytes())
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc
