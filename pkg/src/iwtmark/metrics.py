"""Fidelity (MSE/PSNR) and payload-rate measurements."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DimensionMismatch

MAX_VALUE = 255


@dataclass(frozen=True)
class QualityReport:
    mse: Fraction
    psnr_db: float  # math.inf when the images are identical
    payload_bits: int = 0
    bpp: float = 0.0


def _pixels(img):
    return np.asarray(img.pixels if hasattr(img, "pixels") else img, dtype=np.int64)


def squared_error(a, b) -> int:
    pa, pb = _pixels(a), _pixels(b)
    if pa.shape != pb.shape:
        raise DimensionMismatch(f"image shapes differ: {pa.shape} vs {pb.shape}")
    diff = pa - pb
    return int(np.sum(diff * diff))


def mse(a, b) -> Fraction:
    """Mean squared error as an exact fraction."""
    return Fraction(squared_error(a, b), _pixels(a).size)


def psnr(a, b) -> float:
    """``10 * log10(255**2 / MSE)`` in dB; ``math.inf`` for identical images."""
    sse = squared_error(a, b)
    if sse == 0:
        return math.inf
    n = _pixels(a).size
    # one division at the end keeps the result platform-independent
    return 10.0 * math.log10(Fraction(MAX_VALUE * MAX_VALUE * n, sse))


def bpp(payload_bits: int, img) -> float:
    if payload_bits < 0:
        raise ValueError("payload_bits must be non-negative")
    return payload_bits / _pixels(img).size


def quality_report(cover, marked, payload_bits: int = 0) -> QualityReport:
    return QualityReport(
        mse=mse(cover, marked),
        psnr_db=psnr(cover, marked),
        payload_bits=payload_bits,
        bpp=bpp(payload_bits, cover),
    )


def format_psnr(value: float, digits: int = 4) -> str:
    return "inf" if math.isinf(value) else f"{value:.{digits}f}"
