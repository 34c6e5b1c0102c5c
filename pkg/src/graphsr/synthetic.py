"""Seeded synthetic HR/LR pairs with guaranteed cross-scale recurrence.

The ``tiled-multiscale`` scheme paints one seeded noise texture at two
scales in disjoint regions: sparse "donor" cells carry the texture tiled at
native scale, everything else carries its 1/s-scale version. After the
pipeline downsamples the LR image again, the donor cells show exactly the
pattern the small-scale regions show in the LR image itself, so queries
there find zero-distance cross-scale matches whose scale-mapped exemplars
reproduce the ground truth.

The recurrence is exact rather than approximate because the small tile is
the *periodic-context* downsample of the native tile (computed on a 3x3
tiling and cropped, so tile seams behave like the infinite tiling) and both
fields are indexed by absolute coordinates. Donor cells sit on a grid pitch
chosen so that the default 30x30 search window always contains one cell's
uncontaminated core, including at image borders.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, InvalidDimensionError
from .image import Image, bicubic_resample

_SCHEMES = ("tiled-multiscale",)

# Donor layout in units of s^2 pixels (one pixel of the twice-downsampled
# image). An 11-wide donor band loses 3 px per side to resampling-kernel
# contamination, leaving a 5-px core: one full period of the
# twice-downsampled texture plus the patch width. Pitch 24 keeps a core
# inside every 30-px window; the conditional extra band covers clipped
# windows at the far edges.
_PITCH = 24
_DONOR = 11
_CORE_LO = 3
_CORE_HI = 8
_EDGE_WINDOW = 16      # half of the default d=30 window, clipped at a border


def _periodic_resample(tile: np.ndarray, scale: float) -> np.ndarray:
    """Resample a tile as if it tiled the infinite plane.

    The tile is replicated 3x3, resampled, and the central tile cropped
    back out; kernel support never reaches the replica boundary, so the
    result equals the resample of the periodic field.
    """
    big = np.tile(tile, (3, 3, 1))
    out = bicubic_resample(Image(big), scale).data
    side = round(tile.shape[0] * scale)
    return out[side:2 * side, side:2 * side]


def _donor_starts(size: int, s: int) -> list[int]:
    """Top-left offsets of donor bands along one axis (HR pixels)."""
    unit = s * s
    period = _PITCH * unit
    donor_w = _DONOR * unit
    starts = [p for p in range(0, size - donor_w + 1, period)]
    # Border queries see only a clipped window tail; append a right-aligned
    # band unless a periodic one already lands its core inside that tail.
    w2 = size // unit
    reachable = any(
        p // unit + _CORE_LO >= w2 - _EDGE_WINDOW
        and p // unit + _CORE_HI <= w2
        for p in starts
    )
    if not reachable:
        starts.append(size - donor_w)
    return starts


def generate_pair(seed: int, size: int, s: int = 2,
                  scheme: str = "tiled-multiscale") -> tuple[Image, Image]:
    """Deterministic (HR, LR) pair; LR is the bicubic 1/s downsample of HR.

    ``size`` must be divisible by 2*s. Sizes of at least 128 give the full
    donor-cell layout; 256 is the intended working size.
    """
    if scheme not in _SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}, know {_SCHEMES}")
    if s < 2:
        raise ConfigError(f"synthetic pairs need s >= 2, got {s}")
    if size % (2 * s) != 0:
        raise InvalidDimensionError(
            f"size must be divisible by {2 * s}, got {size}"
        )
    if size < 16 * s:
        raise InvalidDimensionError(f"size {size} too small, need >= {16 * s}")

    rng = np.random.default_rng(seed)
    t = 6 * s  # native tile side
    # Blocky noise tile (2s x 2s constant cells): its 1/s downsample keeps
    # nearly full contrast while still carrying plenty of energy above the
    # LR Nyquist rate, so plain bicubic genuinely loses texture that the
    # cross-scale exemplars can restore.
    cells = rng.uniform(0.2, 0.8, size=(t // (2 * s), t // (2 * s), 3))
    native = np.kron(cells, np.ones((2 * s, 2 * s))[:, :, None])
    small = _periodic_resample(native, 1.0 / s)

    ys = np.arange(size)
    native_field = native[np.ix_(ys % t, ys % t)]
    small_field = small[np.ix_(ys % (t // s), ys % (t // s))]

    hr = small_field.copy()
    donor_w = _DONOR * s * s
    starts = _donor_starts(size, s)
    for y0 in starts:
        for x0 in starts:
            hr[y0:y0 + donor_w, x0:x0 + donor_w] = \
                native_field[y0:y0 + donor_w, x0:x0 + donor_w]

    hr_img = Image(np.clip(hr, 0.0, 1.0))
    lr_img = bicubic_resample(hr_img, 1.0 / s)
    return hr_img, lr_img
