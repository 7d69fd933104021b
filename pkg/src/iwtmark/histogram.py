"""Coefficient histograms, peak search, and the invertible bin shifts.

Shifts are threshold comparisons on the coefficient planes themselves; the
histogram is only ever derived from a plane, never edited directly.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import CoefficientOverflow, EmptyHistogram

INT32_MIN = -(2**31)
INT32_MAX = 2**31 - 1


class PeakInfo(NamedTuple):
    value: int
    count: int


def build_histogram(plane) -> dict[int, int]:
    """Exact value -> count map of a coefficient plane."""
    values, counts = np.unique(np.asarray(plane).ravel(), return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def peak_key(value: int, count: int):
    """Sort key preferring high counts, then small ``|value|``, then ``value >= 0``."""
    return (-count, abs(value), value < 0)


def find_peak(hist: dict[int, int]) -> PeakInfo:
    live = {v: c for v, c in hist.items() if c > 0}
    if not live:
        raise EmptyHistogram("cannot locate the peak of an empty histogram")
    value = min(live, key=lambda v: peak_key(v, live[v]))
    return PeakInfo(value, live[value])


def shift_right(plane, threshold: int, below: bool = False) -> np.ndarray:
    """Add one to every coefficient ``>= threshold`` (``<= threshold`` if ``below``)."""
    out = np.array(plane, dtype=np.int64, copy=True)
    mask = out <= threshold if below else out >= threshold
    if mask.any() and out[mask].max() >= INT32_MAX:
        raise CoefficientOverflow("shift would leave the signed 32-bit range")
    out[mask] += 1
    return out


def shift_left(plane, threshold: int, below: bool = False) -> np.ndarray:
    """Subtract one from every coefficient ``>= threshold`` (``<= threshold`` if ``below``)."""
    out = np.array(plane, dtype=np.int64, copy=True)
    mask = out <= threshold if below else out >= threshold
    if mask.any() and out[mask].min() <= INT32_MIN:
        raise CoefficientOverflow("shift would leave the signed 32-bit range")
    out[mask] -= 1
    return out
