"""Synthetic pool-scene frames: a bright tiled floor seen through water with a
dark cube resting on it. Fully determined by the seed."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import pnm
from .frames import COLOR, ImageFrame

POOL_SIZE = (120, 160)  # height, width


def pool_frame(seed: int, size=POOL_SIZE, timestamp: float = 0.0) -> ImageFrame:
    rng = np.random.default_rng(seed)
    h, w = size
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    # floor brightens toward the bottom of the frame (closer to the camera)
    depth = yy / (h - 1)
    base = np.stack([150 + 70 * depth, 200 + 45 * depth, 215 + 35 * depth], axis=-1)
    tile = int(rng.integers(14, 24))
    grout = ((yy.astype(int) % tile) < 2) | ((xx.astype(int) % tile) < 2)
    base[grout] *= 0.8
    # caustic ripples
    kx, ky, ph = rng.uniform(0.05, 0.2), rng.uniform(0.05, 0.2), rng.uniform(0, 2 * np.pi)
    base += (12 * np.sin(kx * xx + ky * yy + ph) * np.sin(0.7 * ky * xx - kx * yy))[..., None]
    # dark cube with a slightly lighter top face
    cw = int(rng.integers(w // 6, w // 3))
    ch = int(cw * rng.uniform(0.8, 1.1))
    x0 = int(rng.integers(4, w - cw - 4))
    y0 = int(rng.integers(h // 4, h - ch - 4))
    top = max(2, ch // 4)
    base[y0 : y0 + ch, x0 : x0 + cw] = (25, 35, 45)
    base[y0 : y0 + top, x0 : x0 + cw] = (45, 60, 70)
    base += rng.normal(0.0, 4.0, size=base.shape)
    px = np.clip(np.floor(base + 0.5), 0, 255).astype(np.uint8)
    return ImageFrame(px, COLOR, timestamp)


def pool_corpus(n: int = 5, seed: int = 0, size=POOL_SIZE) -> list[ImageFrame]:
    return [pool_frame(seed * 1000 + i, size, timestamp=float(i)) for i in range(n)]


def write_corpus(frames, directory, stem: str = "pool") -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, f in enumerate(frames):
        p = directory / f"{stem}_{i:02d}{pnm.EXTENSIONS[f.channels]}"
        pnm.write(p, f)
        paths.append(p)
    return paths
