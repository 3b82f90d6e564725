"""Deterministic frame transforms and the ``TransformSpec`` pipeline description."""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .frames import BINARY, COLOR, GRAY, ImageFrame

ThresholdMode = Union[int, str]
OTSU = "otsu"
OTSU_FALLBACK = 128


class OtsuFallbackWarning(UserWarning):
    """Otsu thresholding was asked to split a constant image."""


def _require(img: ImageFrame, channels: str, op: str) -> None:
    if img.channels != channels:
        raise ValueError(f"{op} expects a {channels} frame, got {img.channels}")


def to_grayscale(img: ImageFrame) -> ImageFrame:
    _require(img, COLOR, "to_grayscale")
    rgb = img.pixels.astype(np.int64)
    # integer weights keep the half-up rounding exact
    y = (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000
    return ImageFrame(y.astype(np.uint8), GRAY, img.timestamp)


def otsu_threshold(gray: np.ndarray) -> tuple[int, bool]:
    """Threshold ``t`` maximizing between-class variance for the split
    ``{< t} | {>= t}``; lowest maximizer wins. Returns ``(t, degenerate)`` where
    ``degenerate`` marks a constant image (``t`` is then the fallback 128)."""
    hist = np.bincount(np.asarray(gray, dtype=np.uint8).ravel(), minlength=256).tolist()
    total_n = sum(hist)
    total_s = sum(i * c for i, c in enumerate(hist))
    best_t, best = None, Fraction(-1)
    n0 = s0 = 0
    for t in range(1, 256):
        n0 += hist[t - 1]
        s0 += (t - 1) * hist[t - 1]
        n1 = total_n - n0
        if n0 == 0 or n1 == 0:
            continue
        s1 = total_s - s0
        # proportional to w0 w1 (mu0 - mu1)^2, exact in rationals
        score = Fraction((s0 * n1 - s1 * n0) ** 2, n0 * n1)
        if score > best:
            best_t, best = t, score
    if best_t is None:
        return OTSU_FALLBACK, True
    return best_t, False


def _threshold_value(values: np.ndarray, mode: ThresholdMode) -> int:
    if mode == OTSU:
        t, degenerate = otsu_threshold(values)
        if degenerate:
            warnings.warn("constant image: otsu falls back to threshold 128", OtsuFallbackWarning, stacklevel=3)
        return t
    if isinstance(mode, (int, np.integer)) and not isinstance(mode, bool):
        return int(mode)
    raise ValueError(f"threshold mode must be an integer or 'otsu', got {mode!r}")


def binarize(img: ImageFrame, mode: ThresholdMode = OTSU) -> ImageFrame:
    _require(img, GRAY, "binarize")
    t = _threshold_value(img.pixels, mode)
    return ImageFrame((img.pixels >= t).astype(np.uint8), BINARY, img.timestamp)


def sobel_magnitude(img: ImageFrame) -> np.ndarray:
    """8-bit Sobel magnitude: |grad| / 4 rounded half-up and clipped to 255, so a
    full 0-to-255 step maps to 255."""
    _require(img, GRAY, "edge_detect")
    if img.width < 3 or img.height < 3:
        raise ValueError(f"edge_detect needs at least 3x3 pixels, got {img.width}x{img.height}")
    p = np.pad(img.pixels.astype(np.int64), 1, mode="edge")
    gx = (p[:-2, 2:] + 2 * p[1:-1, 2:] + p[2:, 2:]) - (p[:-2, :-2] + 2 * p[1:-1, :-2] + p[2:, :-2])
    gy = (p[2:, :-2] + 2 * p[2:, 1:-1] + p[2:, 2:]) - (p[:-2, :-2] + 2 * p[:-2, 1:-1] + p[:-2, 2:])
    mag = np.floor(np.sqrt((gx * gx + gy * gy).astype(np.float64)) / 4.0 + 0.5)
    return np.minimum(mag, 255).astype(np.uint8)


def edge_detect(img: ImageFrame, mode: ThresholdMode = OTSU) -> ImageFrame:
    mag = sobel_magnitude(img)
    t = _threshold_value(mag, mode)
    return ImageFrame((mag >= t).astype(np.uint8), BINARY, img.timestamp)


def downsample(img: ImageFrame, factor: int) -> ImageFrame:
    if isinstance(factor, bool) or not isinstance(factor, (int, np.integer)) or factor < 1:
        raise ValueError(f"downsample factor must be an integer >= 1, got {factor!r}")
    factor = int(factor)
    if factor == 1:
        return img
    h, w = img.height // factor, img.width // factor
    if h == 0 or w == 0:
        raise ValueError(f"factor {factor} leaves no pixels of a {img.width}x{img.height} frame")
    px = img.pixels[: h * factor, : w * factor].astype(np.int64)
    blocks = px.reshape((h, factor, w, factor) + px.shape[2:])
    sums = blocks.sum(axis=(1, 3))
    n = factor * factor
    if img.channels == BINARY:
        out = (2 * sums >= n).astype(np.uint8)
    else:
        out = ((2 * sums + n) // (2 * n)).astype(np.uint8)
    return ImageFrame(out, img.channels, img.timestamp)


def upsample_to(img: ImageFrame, height: int, width: int) -> ImageFrame:
    """Pixel replication up to ``(height, width)``; leftover rows and columns
    repeat the last ones."""
    if (img.height, img.width) == (height, width):
        return img
    fy, fx = max(1, height // img.height), max(1, width // img.width)
    px = np.repeat(np.repeat(img.pixels, fy, axis=0), fx, axis=1)
    pad_y, pad_x = height - px.shape[0], width - px.shape[1]
    if pad_y < 0 or pad_x < 0:
        raise ValueError("upsample target is smaller than the frame")
    if pad_y or pad_x:
        widths = [(0, pad_y), (0, pad_x)] + [(0, 0)] * (px.ndim - 2)
        px = np.pad(px, widths, mode="edge")
    return ImageFrame(px, img.channels, img.timestamp)


KINDS = ("identity", "grayscale", "binarize", "edge_detect", "downsample")


@dataclass(frozen=True)
class TransformSpec:
    """One transform step. ``param`` is the threshold mode for ``binarize`` and
    ``edge_detect`` and the integer factor for ``downsample``."""

    kind: str
    param: ThresholdMode | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind in ("binarize", "edge_detect"):
            mode = OTSU if self.param is None else self.param
            if mode != OTSU and (isinstance(mode, bool) or not isinstance(mode, (int, np.integer))):
                raise ValueError(f"{self.kind} threshold must be an integer or 'otsu', got {mode!r}")
            object.__setattr__(self, "param", mode if mode == OTSU else int(mode))
        elif self.kind == "downsample":
            f = self.param
            if isinstance(f, bool) or not isinstance(f, (int, np.integer)) or f < 1:
                raise ValueError(f"downsample factor must be an integer >= 1, got {f!r}")
            object.__setattr__(self, "param", int(f))
        elif self.param is not None:
            raise ValueError(f"{self.kind} takes no parameter")

    def __str__(self):
        return self.kind if self.param is None else f"{self.kind}({self.param})"

    def apply(self, img: ImageFrame) -> ImageFrame:
        if self.kind == "identity":
            return img
        if self.kind == "grayscale":
            return to_grayscale(img) if img.channels == COLOR else img
        if self.kind == "downsample":
            return downsample(img, self.param)
        if img.channels == COLOR:
            img = to_grayscale(img)
        elif img.channels == BINARY:
            img = ImageFrame(img.pixels * np.uint8(255), GRAY, img.timestamp)
        fn = binarize if self.kind == "binarize" else edge_detect
        return fn(img, self.param)


Pipeline = tuple[TransformSpec, ...]
_STEP = re.compile(r"^\s*([a-z_\-]+)\s*(?:\(\s*([^)]*?)\s*\))?\s*$")


def parse_pipeline(text: str) -> Pipeline:
    """Parse ``"grayscale | downsample(2)"`` style descriptions (left to right)."""
    steps = []
    for part in text.split("|"):
        m = _STEP.match(part)
        if not m:
            raise ValueError(f"cannot parse transform step {part!r}")
        kind = m.group(1).replace("-", "_")
        if kind == "edge":
            kind = "edge_detect"
        arg = m.group(2)
        param = None
        if arg:
            param = arg if arg == OTSU else _int(arg, part)
        steps.append(TransformSpec(kind, param))
    return tuple(steps)


def _int(text: str, part: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"bad parameter in transform step {part!r}") from None


def as_pipeline(h) -> Pipeline:
    if isinstance(h, TransformSpec):
        return (h,)
    if isinstance(h, str):
        return parse_pipeline(h)
    steps = tuple(h)
    if not steps or not all(isinstance(s, TransformSpec) for s in steps):
        raise ValueError("a pipeline is a non-empty sequence of TransformSpec")
    return steps


def pipeline_name(h) -> str:
    return " | ".join(str(s) for s in as_pipeline(h))


def apply_transform(h: TransformSpec | Sequence[TransformSpec] | str, img: ImageFrame) -> ImageFrame:
    """Apply a step or a pipeline. Thresholding steps convert color or binary
    input to gray first."""
    for step in as_pipeline(h):
        img = step.apply(img)
    return img
