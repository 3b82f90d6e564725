"""Plug-in entropy and mutual information estimators (base 2) for aligned frames."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .frames import BINARY, COLOR, ImageFrame
from .transforms import apply_transform, to_grayscale, upsample_to

RGB = "rgb"
LUMINANCE = "luminance"


def _default_bins(img: ImageFrame) -> int:
    return 2 if img.channels == BINARY else 256


def symbols(img: ImageFrame, bins: int | None = None, color_mode: str = RGB) -> np.ndarray:
    """Flat integer symbol per pixel after equal-width binning.

    Color pixels become one joint symbol over the three binned channels, or
    their luminance when ``color_mode`` is ``"luminance"``.
    """
    if color_mode not in (RGB, LUMINANCE):
        raise ValueError(f"unknown color mode {color_mode!r}")
    if img.channels == COLOR and color_mode == LUMINANCE:
        img = to_grayscale(img)
    b = _default_bins(img) if bins is None else int(bins)
    if b < 1:
        raise ValueError("bins must be >= 1")
    levels = 2 if img.channels == BINARY else 256
    q = img.pixels.astype(np.int64) * b // levels
    if img.channels == COLOR:
        return ((q[..., 0] * b + q[..., 1]) * b + q[..., 2]).ravel()
    return q.ravel()


def _plugin_entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log2(p)))


def entropy(img: ImageFrame, bins: int | None = None, color_mode: str = RGB) -> float:
    s = symbols(img, bins, color_mode)
    _, counts = np.unique(s, return_counts=True)
    return _plugin_entropy(counts, s.size)


def mutual_information(
    X: ImageFrame, Y: ImageFrame, bins: int | None = None, color_mode: str = RGB
) -> float:
    """Plug-in estimate of I(X; Y) in bits over aligned pixel pairs.

    ``bins`` applies to both frames; by default each frame uses 256 bins
    (8-bit) or 2 (binary).
    """
    if (X.height, X.width) != (Y.height, Y.width):
        raise ValueError(f"frame sizes differ: {X.width}x{X.height} vs {Y.width}x{Y.height}")
    sx = symbols(X, bins, color_mode)
    sy = symbols(Y, bins, color_mode)
    n = sx.size
    if n == 0:
        return 0.0
    ux, ix = np.unique(sx, return_inverse=True)
    uy, iy = np.unique(sy, return_inverse=True)
    ix = ix.ravel()
    iy = iy.ravel()
    joint = np.unique(ix * uy.size + iy, return_counts=True)
    cx = np.bincount(ix, minlength=ux.size)
    cy = np.bincount(iy, minlength=uy.size)
    keys, cxy = joint
    jx, jy = keys // uy.size, keys % uy.size
    p = cxy / n
    terms = p * (np.log2(p) - np.log2(cx[jx] / n) - np.log2(cy[jy] / n))
    return max(0.0, float(np.sum(terms)))


def preserved_info(h, y: ImageFrame, bins: int | None = None, color_mode: str = RGB) -> float:
    """I(h(y); y) with h(y) replicated back to the size of y."""
    out = apply_transform(h, y)
    out = upsample_to(out, y.height, y.width)
    return mutual_information(out, y, bins, color_mode)


def expected_preserved_info(
    h, corpus: Iterable[ImageFrame], bins: int | None = None, color_mode: str = RGB
) -> float:
    frames = list(corpus)
    if not frames:
        raise ValueError("corpus is empty")
    values = [preserved_info(h, y, bins, color_mode) for y in frames]
    return float(sum(values) / len(values))
