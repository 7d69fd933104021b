import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iwtmark.errors import MalformedHeader, PGMError, TruncatedData, UnsupportedMaxval
from iwtmark.image_io import GrayImage, load_pgm, read_pgm, save_pgm, write_pgm


def test_read_constant_p5():
    img = read_pgm(b"P5\n4 4\n255\n" + bytes([7] * 16))
    assert (img.width, img.height) == (4, 4)
    assert (img.pixels == 7).all()


def test_read_single_pixel_p2():
    img = read_pgm(b"P2\n1 1\n255\n128\n")
    assert img.pixels.tolist() == [[128]]


def test_unsupported_maxval():
    with pytest.raises(UnsupportedMaxval):
        read_pgm(b"P5\n2 2\n65535\n" + bytes(8))


def test_write_single_black_pixel():
    assert write_pgm(GrayImage(np.zeros((1, 1), np.uint8))) == b"P5\n1 1\n255\n\x00"


def test_canonical_bytes_of_read_example():
    raw = b"P5\n4 4\n255\n" + bytes([7] * 16)
    # an equivalent file with comments and odd spacing
    messy = b"P5 # cover\n# made by hand\n4   4\n255\n" + bytes([7] * 16)
    assert write_pgm(read_pgm(messy)) == raw
    assert write_pgm(read_pgm(raw)) == raw


def test_raster_order_is_row_major():
    img = read_pgm(b"P2\n3 2\n255\n1 2 3\n4 5 6\n")
    assert img.pixels.tolist() == [[1, 2, 3], [4, 5, 6]]


@pytest.mark.parametrize(
    "data, error",
    [
        (b"P6\n1 1\n255\n\x00\x00\x00", MalformedHeader),
        (b"P5\n0 4\n255\n", MalformedHeader),
        (b"P5\nx 4\n255\n", MalformedHeader),
        (b"P5\n4", MalformedHeader),
        (b"P5\n4 4\n255\n" + bytes(15), TruncatedData),
        (b"P2\n2 2\n255\n1 2 3\n", TruncatedData),
        (b"P2\n1 1\n255\n300\n", PGMError),
    ],
)
def test_rejects_bad_input(data, error):
    with pytest.raises(error):
        read_pgm(data)


def test_image_invariants():
    with pytest.raises(ValueError):
        GrayImage(np.array([[256]]))
    with pytest.raises(ValueError):
        GrayImage(np.zeros((0, 3), np.uint8))
    img = GrayImage(np.array([[1, 2]], dtype=np.int64))
    assert img.pixels.dtype == np.uint8
    with pytest.raises(ValueError):
        img.pixels[0, 0] = 9


def test_file_helpers(tmp_path):
    img = GrayImage(np.arange(12, dtype=np.uint8).reshape(3, 4))
    save_pgm(tmp_path / "a.pgm", img)
    assert load_pgm(tmp_path / "a.pgm") == img


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 128), st.integers(1, 128), st.integers(0, 2**32 - 1))
def test_roundtrip_random_sizes(h, w, seed):
    px = np.random.default_rng(seed).integers(0, 256, (h, w), dtype=np.uint8)
    img = GrayImage(px)
    data = write_pgm(img)
    assert read_pgm(data) == img
    assert write_pgm(GrayImage(px)) == data
