import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hrimap.obschannel import BINARY, COLOR, GRAY, ImageFrame, pnm, pool_frame


def frames(channels, max_side=20):
    tail = (3,) if channels == COLOR else ()
    hi = 1 if channels == BINARY else 255
    return st.tuples(st.integers(1, max_side), st.integers(1, max_side)).flatmap(
        lambda hw: arrays(np.uint8, hw + tail, elements=st.integers(0, hi)).map(lambda a: ImageFrame(a, channels))
    )


@given(st.one_of(frames(GRAY), frames(COLOR), frames(BINARY)))
def test_round_trip_is_bit_exact(img):
    data = pnm.encode(img)
    back = pnm.decode(data)
    assert back.channels == img.channels and back.same_pixels(img)
    assert pnm.encode(back) == data


def test_headers():
    assert pnm.encode(ImageFrame(np.zeros((2, 3), np.uint8), GRAY)).startswith(b"P5\n3 2\n255\n")
    assert pnm.encode(ImageFrame(np.zeros((2, 3, 3), np.uint8), COLOR)).startswith(b"P6\n3 2\n255\n")
    assert pnm.encode(ImageFrame(np.zeros((2, 3), np.uint8), BINARY)).startswith(b"P4\n3 2\n")


def test_pbm_rows_are_padded_and_black_is_one():
    img = ImageFrame(np.array([[1] * 9, [0] * 9], np.uint8), BINARY)
    raster = pnm.encode(img).split(b"\n", 2)[2]
    # white pixels (1) are stored as 0 bits; each 9-pixel row takes two bytes
    assert raster == bytes([0x00, 0x00, 0xFF, 0x80])


def test_header_comments_and_whitespace():
    data = b"P5 # gray\n# size next\n2\t1\n255\n" + bytes([7, 9])
    assert pnm.decode(data).pixels.tolist() == [[7, 9]]


@pytest.mark.parametrize(
    "data",
    [
        b"P3\n1 1\n255\n0",
        b"P5\n2 x\n255\n" + bytes(2),
        b"P5\n0 2\n255\n",
        b"P5\n2 2\n65535\n" + bytes(8),
        b"P5\n2 2\n255\n" + bytes(3),
        b"P6\n1 1\n255\n" + bytes(2),
        b"P4\n9 1\n" + bytes(1),
        b"P5\n2",
    ],
)
def test_malformed_inputs(data):
    with pytest.raises(pnm.PNMError):
        pnm.decode(data)


def test_file_io_names_the_file(tmp_path):
    img = pool_frame(0, size=(12, 16))
    path = tmp_path / ("pool" + pnm.EXTENSIONS[COLOR])
    pnm.write(path, img)
    assert pnm.read(path, timestamp=2.5).same_pixels(img)
    assert pnm.read(path, timestamp=2.5).timestamp == 2.5
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P5\n")
    with pytest.raises(pnm.PNMError, match="bad.pgm"):
        pnm.read(bad)
