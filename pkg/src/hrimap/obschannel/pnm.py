"""Binary Netpbm codecs: P4 (binary), P5 (gray) and P6 (color), 8-bit only.

PBM stores 1 for black. Binary frames use 1 for bright pixels, so bits are
inverted on the way in and out; a write/read cycle is lossless.
"""

from __future__ import annotations

import os

import numpy as np

from .frames import BINARY, COLOR, GRAY, ImageFrame

_MAGIC = {b"P4": BINARY, b"P5": GRAY, b"P6": COLOR}


class PNMError(ValueError):
    """Malformed or unsupported Netpbm data."""


def _tokens(data: bytes, count: int, pos: int):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise PNMError("truncated header")
        out.append(data[start:pos])
    return out, pos


def decode(data: bytes, timestamp: float = 0.0) -> ImageFrame:
    magic = data[:2]
    if magic not in _MAGIC:
        raise PNMError(f"unsupported magic number {magic!r}")
    kind = _MAGIC[magic]
    ntok = 2 if kind == BINARY else 3
    toks, pos = _tokens(data, ntok, 2)
    try:
        vals = [int(t) for t in toks]
    except ValueError:
        raise PNMError(f"non-integer header field in {toks!r}") from None
    width, height = vals[0], vals[1]
    if width <= 0 or height <= 0:
        raise PNMError(f"invalid dimensions {width}x{height}")
    if kind != BINARY and vals[2] != 255:
        raise PNMError(f"only maxval 255 is supported, got {vals[2]}")
    # exactly one whitespace byte separates header and raster
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise PNMError("missing whitespace after header")
    raster = data[pos + 1 :]
    if kind == BINARY:
        row_bytes = (width + 7) // 8
        need = row_bytes * height
        if len(raster) < need:
            raise PNMError(f"raster too short: {len(raster)} < {need} bytes")
        packed = np.frombuffer(raster[:need], dtype=np.uint8).reshape(height, row_bytes)
        bits = np.unpackbits(packed, axis=1)[:, :width]
        return ImageFrame(1 - bits, BINARY, timestamp)
    depth = 3 if kind == COLOR else 1
    need = width * height * depth
    if len(raster) < need:
        raise PNMError(f"raster too short: {len(raster)} < {need} bytes")
    px = np.frombuffer(raster[:need], dtype=np.uint8)
    shape = (height, width, 3) if kind == COLOR else (height, width)
    return ImageFrame(px.reshape(shape), kind, timestamp)


def encode(img: ImageFrame) -> bytes:
    header = f"{img.width} {img.height}\n"
    if img.channels == BINARY:
        bits = (1 - img.pixels).astype(np.uint8)
        return b"P4\n" + header.encode() + np.packbits(bits, axis=1).tobytes()
    magic = b"P6\n" if img.channels == COLOR else b"P5\n"
    return magic + header.encode() + b"255\n" + np.ascontiguousarray(img.pixels).tobytes()


def read(path, timestamp: float = 0.0) -> ImageFrame:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return decode(data, timestamp)
    except PNMError as exc:
        raise PNMError(f"{os.fspath(path)}: {exc}") from None


def write(path, img: ImageFrame) -> None:
    with open(path, "wb") as fh:
        fh.write(encode(img))


EXTENSIONS = {BINARY: ".pbm", GRAY: ".pgm", COLOR: ".ppm"}
