"""8-bit grayscale images and PGM (P5/P2) serialization."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MalformedHeader, PGMError, TruncatedData, UnsupportedMaxval


@dataclass(frozen=True, eq=False)
class GrayImage:
    """An 8-bit grayscale image stored as a (height, width) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-D pixel grid, got shape {px.shape}")
        if px.dtype != np.uint8:
            if not np.issubdtype(px.dtype, np.integer):
                raise ValueError(f"pixels must be integers, got {px.dtype}")
            if px.min() < 0 or px.max() > 255:
                raise ValueError("pixel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        px = px.copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def size(self) -> int:
        return self.pixels.size

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


def _header_tokens(data: bytes, pos: int, count: int):
    """Pull ``count`` header tokens starting at ``pos``, skipping comments.

    Returns the tokens and the offset just past the last one.
    """
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos] in b" \t\r\n\v\f":
            pos += 1
        if pos >= n:
            raise MalformedHeader("PGM header ends prematurely")
        if data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and data[pos] not in b" \t\r\n\v\f#":
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def _parse_dim(tok: bytes, what: str) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise MalformedHeader(f"bad {what}: {tok!r}") from None
    if value < 1:
        raise MalformedHeader(f"{what} must be positive, got {value}")
    return value


def read_pgm(data: bytes) -> GrayImage:
    """Parse a binary (P5) or ASCII (P2) PGM with maxval 255."""
    if len(data) < 2 or data[:2] not in (b"P5", b"P2"):
        raise MalformedHeader(f"bad magic {data[:2]!r}, expected P5 or P2")
    magic = data[:2]
    if len(data) > 2 and not data[2:3].isspace() and data[2:3] != b"#":
        raise MalformedHeader("magic number must be followed by whitespace")

    (w_tok, h_tok, max_tok), pos = _header_tokens(data, 2, 3)
    width = _parse_dim(w_tok, "width")
    height = _parse_dim(h_tok, "height")
    try:
        maxval = int(max_tok)
    except ValueError:
        raise MalformedHeader(f"bad maxval: {max_tok!r}") from None
    if maxval != 255:
        raise UnsupportedMaxval(f"only maxval 255 is supported, got {maxval}")

    n = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        if pos >= len(data) or not data[pos : pos + 1].isspace():
            raise TruncatedData(f"expected {n} samples, got 0")
        raster = data[pos + 1 : pos + 1 + n]
        if len(raster) < n:
            raise TruncatedData(f"expected {n} samples, got {len(raster)}")
        pixels = np.frombuffer(raster, dtype=np.uint8)
    else:
        fields = data[pos:].split()
        if len(fields) < n:
            raise TruncatedData(f"expected {n} samples, got {len(fields)}")
        try:
            values = np.array([int(f) for f in fields[:n]], dtype=np.int64)
        except ValueError:
            raise PGMError("non-numeric sample in P2 raster") from None
        if values.min() < 0 or values.max() > 255:
            raise PGMError("P2 sample outside [0, 255]")
        pixels = values.astype(np.uint8)
    return GrayImage(pixels.reshape(height, width))


def write_pgm(img: GrayImage) -> bytes:
    """Canonical binary PGM: ``P5\\n<w> <h>\\n255\\n`` then the raw raster."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def load_pgm(path) -> GrayImage:
    return read_pgm(Path(path).read_bytes())


def save_pgm(path, img: GrayImage) -> None:
    Path(path).write_bytes(write_pgm(img))
