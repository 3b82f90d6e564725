import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import direct_mi

from hrimap.obschannel import (
    BINARY,
    COLOR,
    GRAY,
    ChannelBudget,
    ImageFrame,
    OtsuFallbackWarning,
    TransformSpec,
    apply_transform,
    binarize,
    bits_required,
    downsample,
    edge_detect,
    entropy,
    expected_preserved_info,
    mutual_information,
    otsu_threshold,
    parse_pipeline,
    pool_corpus,
    pool_frame,
    preserved_info,
    select_transform,
    to_grayscale,
    upsample_to,
)


def gray(px):
    return ImageFrame(np.array(px, dtype=np.uint8), GRAY)


def color(px):
    return ImageFrame(np.array(px, dtype=np.uint8), COLOR)


gray_frames = st.integers(1, 12).flatmap(
    lambda h: st.integers(1, 12).flatmap(
        lambda w: arrays(np.uint8, (h, w), elements=st.integers(0, 255)).map(lambda a: ImageFrame(a, GRAY))
    )
)
color_frames = st.integers(1, 8).flatmap(
    lambda h: st.integers(1, 8).flatmap(
        lambda w: arrays(np.uint8, (h, w, 3), elements=st.integers(0, 255)).map(lambda a: ImageFrame(a, COLOR))
    )
)


# ---------------------------------------------------------------- frames


def test_frame_invariants():
    with pytest.raises(ValueError):
        ImageFrame(np.zeros((2, 2)), "rgba")
    with pytest.raises(ValueError):
        ImageFrame(np.full((2, 2), 2), BINARY)
    with pytest.raises(ValueError):
        ImageFrame(np.zeros((2, 2)), COLOR)
    with pytest.raises(ValueError):
        ImageFrame(np.full((2, 2), 300), GRAY)


@pytest.mark.parametrize(
    "shape, channels, bits",
    [((480, 640, 3), COLOR, 7_372_800), ((480, 640), BINARY, 307_200), ((240, 320), GRAY, 614_400)],
)
def test_bits_required(shape, channels, bits):
    assert bits_required(ImageFrame(np.zeros(shape, np.uint8), channels)) == bits


# ---------------------------------------------------------------- transforms


def test_grayscale_examples():
    assert np.all(to_grayscale(color(np.full((3, 4, 3), 255))).pixels == 255)
    assert np.all(to_grayscale(color(np.tile([255, 0, 0], (2, 2, 1)))).pixels == 76)
    with pytest.raises(ValueError):
        to_grayscale(gray([[1, 2]]))


@given(color_frames)
def test_grayscale_matches_float_formula(img):
    rgb = img.pixels.astype(float)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    out = to_grayscale(img).pixels.astype(float)
    assert np.all(np.abs(out - y) <= 0.5 + 1e-9)


def test_binarize_examples():
    assert np.all(binarize(gray(np.zeros((3, 3))), 1).pixels == 0)
    cb = np.indices((4, 4)).sum(axis=0) % 2 * 255
    assert np.array_equal(binarize(gray(cb), 128).pixels, cb // 255)


def brute_otsu(px):
    values = px.ravel().astype(float)
    best, best_t = -1.0, None
    for t in range(256):
        lo, hi = values[values < t], values[values >= t]
        if len(lo) == 0 or len(hi) == 0:
            continue
        w0, w1 = len(lo) / len(values), len(hi) / len(values)
        var = w0 * w1 * (lo.mean() - hi.mean()) ** 2
        if var > best * (1 + 1e-12):
            best, best_t = var, t
    return best_t


def test_otsu_two_levels():
    img = gray(np.array([[40, 200, 40], [200, 40, 200]]))
    t, degenerate = otsu_threshold(img.pixels)
    assert not degenerate and 40 < t <= 200
    assert t == brute_otsu(img.pixels)
    out = binarize(img, "otsu").pixels
    assert np.array_equal(out, (img.pixels == 200).astype(np.uint8))


@given(gray_frames)
def test_otsu_matches_brute_force(img):
    t, degenerate = otsu_threshold(img.pixels)
    ref = brute_otsu(img.pixels)
    assert degenerate == (ref is None)
    if ref is not None:
        assert t == ref


def test_otsu_constant_image_falls_back():
    img = gray(np.full((3, 3), 77))
    assert otsu_threshold(img.pixels) == (128, True)
    with pytest.warns(OtsuFallbackWarning):
        out = binarize(img, "otsu")
    assert np.all(out.pixels == 0)


def test_edge_detect_examples():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OtsuFallbackWarning)
        assert np.all(edge_detect(gray(np.full((5, 5), 90))).pixels == 0)
    with pytest.raises(ValueError):
        edge_detect(gray(np.zeros((2, 2))))


@pytest.mark.parametrize("k", [1, 3, 6])
def test_edge_detect_vertical_step(k):
    px = np.zeros((6, 8), np.uint8)
    px[:, k:] = 255
    for mode in (128, "otsu"):
        out = edge_detect(gray(px), mode).pixels
        cols = set(np.nonzero(out.any(axis=0))[0])
        assert cols == {k - 1, k}


def test_downsample_examples():
    img = gray(np.arange(16).reshape(4, 4))
    assert downsample(img, 1).same_pixels(img)
    assert downsample(gray([[0, 0], [255, 255]]), 2).pixels.tolist() == [[128]]
    const = gray(np.full((7, 5), 33))
    assert np.all(downsample(const, 3).pixels == 33)
    assert downsample(const, 3).pixels.shape == (2, 1)
    with pytest.raises(ValueError):
        downsample(img, 0)


def test_downsample_binary_majority_ties_to_one():
    img = ImageFrame(np.array([[1, 0, 0, 0], [0, 1, 0, 0]]), BINARY)
    assert downsample(img, 2).pixels.tolist() == [[1, 0]]


def test_downsample_color_per_channel():
    px = np.zeros((2, 2, 3), np.uint8)
    px[0, 0] = (255, 0, 10)
    out = downsample(color(px), 2).pixels
    assert out.tolist() == [[[64, 0, 3]]]


def test_upsample_replication_with_remainder():
    small = gray([[1, 2], [3, 4]])
    big = upsample_to(small, 5, 4).pixels
    assert big.shape == (5, 4)
    assert big[:, 0].tolist() == [1, 1, 3, 3, 3] and big[0].tolist() == [1, 1, 2, 2]


@given(gray_frames, st.integers(1, 4))
def test_transforms_are_deterministic(img, f):
    for spec in ("identity", "binarize(100)", f"downsample({f})"):
        if f > min(img.height, img.width):
            continue
        assert apply_transform(spec, img).same_pixels(apply_transform(spec, img))


def test_pipeline_parsing():
    pipe = parse_pipeline("grayscale | downsample(2)")
    assert pipe == (TransformSpec("grayscale"), TransformSpec("downsample", 2))
    assert parse_pipeline("edge-detect(otsu)") == (TransformSpec("edge_detect", "otsu"),)
    assert parse_pipeline("binarize") == (TransformSpec("binarize", "otsu"),)
    for bad in ("blur", "downsample(0)", "downsample(x)", "identity(3)"):
        with pytest.raises(ValueError):
            parse_pipeline(bad)


def test_thresholding_a_color_frame_goes_through_luminance():
    img = pool_frame(3)
    direct = apply_transform("binarize(otsu)", img)
    manual = binarize(to_grayscale(img), "otsu")
    assert direct.same_pixels(manual)


# ---------------------------------------------------------------- information


def test_mi_examples():
    x = gray([[0, 0], [255, 255]])
    assert mutual_information(x, x, bins=2) == pytest.approx(1.0, abs=1e-12)
    const = gray(np.full((3, 3), 9))
    rng = np.random.default_rng(0)
    other = gray(rng.integers(0, 256, (3, 3)))
    assert mutual_information(const, other) == 0.0
    with pytest.raises(ValueError):
        mutual_information(x, gray([[1, 2, 3]]))


@given(st.one_of(gray_frames, color_frames))
def test_mi_self_is_entropy(img):
    assert abs(mutual_information(img, img) - entropy(img)) <= 1e-12


@given(gray_frames, st.data())
def test_mi_symmetric_and_bounded(x, data):
    y = ImageFrame(data.draw(arrays(np.uint8, x.pixels.shape, elements=st.integers(0, 255))), GRAY)
    ixy = mutual_information(x, y)
    assert ixy >= 0
    assert abs(ixy - mutual_information(y, x)) <= 1e-12
    assert ixy <= min(entropy(x), entropy(y)) + 1e-12


def test_mi_all_binary_2x2_pairs():
    patterns = [np.array(p, dtype=np.uint8).reshape(2, 2) for p in itertools.product((0, 1), repeat=4)]
    for a in patterns:
        for b in patterns:
            est = mutual_information(ImageFrame(a, BINARY), ImageFrame(b, BINARY))
            assert abs(est - direct_mi(a.ravel().tolist(), b.ravel().tolist())) <= 1e-12


def test_mi_color_modes():
    img = pool_frame(1)
    g = to_grayscale(img)
    lum = mutual_information(g, img, color_mode="luminance")
    assert lum == pytest.approx(entropy(g), abs=1e-12)
    assert mutual_information(img, img) > mutual_information(g, img)


def test_expected_preserved_info_examples():
    corpus = pool_corpus(3)
    assert expected_preserved_info("identity", corpus) == pytest.approx(np.mean([entropy(f) for f in corpus]), abs=1e-12)
    consts = [gray(np.full((4, 4), v)) for v in (0, 90, 255)]
    for h in ("identity", "binarize(otsu)", "downsample(2)"):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OtsuFallbackWarning)
            assert expected_preserved_info(h, consts) == 0
    one = corpus[:1]
    assert expected_preserved_info("grayscale", one) == preserved_info("grayscale", one[0])
    with pytest.raises(ValueError):
        expected_preserved_info("identity", [])


def test_pool_corpus_mi_ordering():
    for img in pool_corpus(5):
        g = to_grayscale(img)
        bw = binarize(g, "otsu")
        assert mutual_information(img, g) > mutual_information(img, bw)


def test_pool_corpus_is_deterministic():
    a, b = pool_corpus(2, seed=4), pool_corpus(2, seed=4)
    assert all(x.same_pixels(y) for x, y in zip(a, b))


# ---------------------------------------------------------------- selection


CANDS = ["identity", "grayscale", "binarize(otsu)"]


def test_budget_schedule():
    b = ChannelBudget.from_pairs([(0, 100), (2.5, 10)])
    assert b(-1) == 100 and b(0) == 100 and b(2.49) == 100 and b(2.5) == 10 and b(99) == 10
    for bad in ([(0, 0)], [(1, 5), (0, 5)], []):
        with pytest.raises(ValueError):
            ChannelBudget.from_pairs(bad)


def test_select_identity_when_budget_allows():
    img = pool_frame(0)
    sel = select_transform(CANDS, img, ChannelBudget.constant(bits_required(img)), 0.0)
    assert sel.name == "identity" and not sel.over_budget


def test_select_binary_when_only_it_fits():
    img = pool_frame(0)
    sel = select_transform(CANDS, img, ChannelBudget.constant(img.width * img.height), 0.0)
    assert sel.name == "binarize(otsu)" and not sel.over_budget


def test_select_gray_over_binary_on_pool_image():
    img = pool_frame(2)
    sel = select_transform(CANDS, img, ChannelBudget.constant(8 * img.width * img.height), 0.0)
    assert sel.name == "grayscale"


def test_select_over_budget_is_flagged():
    img = pool_frame(0)
    sel = select_transform(CANDS, img, ChannelBudget.constant(5), 0.0)
    assert sel.over_budget and sel.name == "binarize(otsu)"


def test_select_ties_prefer_fewer_bits_then_order():
    img = gray(np.full((4, 4), 10))
    cands = ["identity", "downsample(2)", "grayscale"]
    sel = select_transform(cands, img, ChannelBudget.constant(10_000), 0.0)
    assert sel.name == "downsample(2)"
    sel = select_transform(["grayscale", "identity"], img, ChannelBudget.constant(10_000), 0.0)
    assert sel.name == "grayscale"


@given(st.integers(1, 600_000), st.floats(0, 10))
def test_select_never_unflagged_over_budget(bits, t):
    img = pool_frame(0, size=(24, 32))
    cands = CANDS + ["grayscale | downsample(2)", "downsample(4)"]
    sel = select_transform(cands, img, ChannelBudget.constant(bits), t)
    assert sel.over_budget == (sel.bits > bits)
