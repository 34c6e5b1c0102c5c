"""PSNR and SSIM on the luminance channel.

Both metrics convert 3-channel inputs to Y (BT.601 studio swing), crop a
border, and work in the [0, 1] domain. SSIM uses the original-publication
constants (11x11 Gaussian window, sigma 1.5, K1=0.01, K2=0.03) with
valid-region filtering; they are deliberately not configurable so reports
stay comparable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, InvalidDimensionError, ScaleMismatchError
from .image import Image, luminance

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03


@dataclass
class QualityReport:
    """PSNR/SSIM pair plus the settings needed to interpret them."""

    psnr_db: float
    ssim: float
    crop_border: int
    notes: str = ""

    def to_dict(self) -> dict:
        out = {
            "psnr_db": "inf" if math.isinf(self.psnr_db) else round(self.psnr_db, 6),
            "ssim": round(self.ssim, 6),
            "crop_border": self.crop_border,
        }
        if self.notes:
            out["notes"] = self.notes
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _cropped_y(a: Image, b: Image, crop: int) -> tuple[np.ndarray, np.ndarray]:
    if (a.height, a.width) != (b.height, b.width):
        raise ScaleMismatchError(
            f"image sizes differ: {a.height}x{a.width} vs {b.height}x{b.width}"
        )
    if crop < 0:
        raise ConfigError(f"crop must be nonnegative, got {crop}")
    if 2 * crop >= min(a.height, a.width):
        raise ConfigError(
            f"crop {crop} removes everything from {a.height}x{a.width}"
        )
    ya = luminance(a).data[:, :, 0]
    yb = luminance(b).data[:, :, 0]
    if crop:
        ya = ya[crop:-crop, crop:-crop]
        yb = yb[crop:-crop, crop:-crop]
    return ya, yb


def psnr_y(a: Image, b: Image, crop: int = 0) -> float:
    """Peak signal-to-noise ratio in dB on the Y channel.

    10*log10(1/MSE) for [0,1]-domain signals; identical inputs give +inf.
    """
    ya, yb = _cropped_y(a, b, crop)
    mse = float(np.mean((ya - yb) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    w = np.outer(g, g)
    return w / w.sum()


def _filter_valid(x: np.ndarray, window: np.ndarray) -> np.ndarray:
    views = sliding_window_view(x, window.shape)
    return np.einsum("rcij,ij->rc", views, window)


def ssim_y(a: Image, b: Image, crop: int = 0) -> float:
    """Mean structural similarity on the Y channel.

    Local statistics come from an 11x11 Gaussian window (sigma 1.5) applied
    with valid-region filtering; dynamic range is 1.
    """
    ya, yb = _cropped_y(a, b, crop)
    if min(ya.shape) < _SSIM_WINDOW:
        raise InvalidDimensionError(
            f"image too small for SSIM: {ya.shape} after crop, "
            f"need >= {_SSIM_WINDOW} per side"
        )
    window = _gaussian_window(_SSIM_WINDOW, _SSIM_SIGMA)
    c1 = _SSIM_K1 ** 2
    c2 = _SSIM_K2 ** 2

    mu_a = _filter_valid(ya, window)
    mu_b = _filter_valid(yb, window)
    var_a = _filter_valid(ya * ya, window) - mu_a * mu_a
    var_b = _filter_valid(yb * yb, window) - mu_b * mu_b
    cov = _filter_valid(ya * yb, window) - mu_a * mu_b

    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def evaluate(sr: Image, gt: Image, crop: int = 0, notes: str = "") -> QualityReport:
    return QualityReport(
        psnr_db=psnr_y(sr, gt, crop),
        ssim=ssim_y(sr, gt, crop),
        crop_border=crop,
        notes=notes,
    )
