from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COLOR = "color"
GRAY = "gray"
BINARY = "binary"

BITS_PER_PIXEL = {COLOR: 24, GRAY: 8, BINARY: 1}


@dataclass(frozen=True, eq=False)
class ImageFrame:
    """Raster frame. ``pixels`` is ``(height, width, 3)`` uint8 for color,
    ``(height, width)`` uint8 for gray, and ``(height, width)`` in {0, 1} for binary."""

    pixels: np.ndarray
    channels: str
    timestamp: float = 0.0

    def __post_init__(self):
        if self.channels not in BITS_PER_PIXEL:
            raise ValueError(f"unknown channel model {self.channels!r}")
        px = np.asarray(self.pixels)
        if px.dtype != np.uint8:
            if px.size and (not np.issubdtype(px.dtype, np.integer) or px.min() < 0 or px.max() > 255):
                raise ValueError("pixel values must be integers in [0, 255]")
            px = px.astype(np.uint8)
        expected_ndim = 3 if self.channels == COLOR else 2
        if px.ndim != expected_ndim or (self.channels == COLOR and px.shape[2] != 3):
            raise ValueError(f"{self.channels} pixels have invalid shape {px.shape}")
        if self.channels == BINARY and px.size and px.max() > 1:
            raise ValueError("binary pixels must be 0 or 1")
        px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)
        object.__setattr__(self, "timestamp", float(self.timestamp))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channel_count(self) -> int:
        return 3 if self.channels == COLOR else 1

    def same_pixels(self, other: "ImageFrame") -> bool:
        return self.channels == other.channels and np.array_equal(self.pixels, other.pixels)

    def __eq__(self, other):
        if not isinstance(other, ImageFrame):
            return NotImplemented
        return self.same_pixels(other) and self.timestamp == other.timestamp

    __hash__ = None


def bits_required(img: ImageFrame) -> int:
    """Uncompressed payload size: width * height * {24, 8, 1}."""
    return img.width * img.height * BITS_PER_PIXEL[img.channels]
