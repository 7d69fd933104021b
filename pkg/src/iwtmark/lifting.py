"""Integer-to-integer 2-D wavelet transforms built from lifting steps.

Two schemes are provided:

* ``HAAR_S`` -- the integer S-transform (db1).
  ``d = a - b``, ``s = b + floor(d / 2)``; an odd tail sample passes
  through to the approximation band.
* ``CDF22_53`` -- the reversible LeGall/CDF 5/3 transform.
  Predict ``d[i] -= floor((s[i] + s[i+1]) / 2)`` then update
  ``s[i] += floor((d[i-1] + d[i] + 2) / 4)`` with whole-sample symmetric
  extension at both ends.

All rounding is floor (arithmetic right shift), never truncation toward
zero. Every 1-D routine works along the last axis so the same code lifts
single signals, whole rows, or whole columns at once.

Subband orientation: ``LH`` holds the horizontal-highpass /
vertical-lowpass quadrant (top right of a Mallat layout), ``HL`` the
horizontal-lowpass / vertical-highpass quadrant (bottom left) and ``HH``
the diagonal quadrant.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import EmptySignal, InconsistentDimensions, LengthMismatch, TooManyLevels


class WaveletId(enum.IntEnum):
    HAAR_S = 0
    CDF22_53 = 1


class Subband(enum.IntEnum):
    LH = 0
    HL = 1
    HH = 2


WAVELET_NAMES = {"haar": WaveletId.HAAR_S, "cdf53": WaveletId.CDF22_53}


def wavelet_from_name(name: str) -> WaveletId:
    key = name.lower().replace("_", "").replace(".", "").replace("/", "")
    aliases = {
        "haar": "haar", "db1": "haar", "haars": "haar", "s": "haar",
        "cdf53": "cdf53", "cdf22": "cdf53", "cdf2253": "cdf53", "53": "cdf53",
        "legall": "cdf53",
    }
    if key not in aliases:
        raise ValueError(f"unknown wavelet {name!r}; choose from {sorted(WAVELET_NAMES)}")
    return WAVELET_NAMES[aliases[key]]


def wavelet_name(wavelet: WaveletId) -> str:
    return {WaveletId.HAAR_S: "haar", WaveletId.CDF22_53: "cdf53"}[WaveletId(wavelet)]


# --- 1-D lifting kernels (last axis) -------------------------------------

def _haar_forward(x):
    n = x.shape[-1]
    nd = n // 2
    a = x[..., 0 : 2 * nd : 2]
    b = x[..., 1 : 2 * nd : 2]
    d = a - b
    s = b + (d >> 1)
    if n % 2:
        s = np.concatenate([s, x[..., -1:]], axis=-1)
    return s, d


def _haar_inverse(s, d, n):
    nd = n // 2
    b = s[..., :nd] - (d >> 1)
    a = d + b
    out = np.empty(s.shape[:-1] + (n,), dtype=np.int64)
    out[..., 0 : 2 * nd : 2] = a
    out[..., 1 : 2 * nd : 2] = b
    if n % 2:
        out[..., -1] = s[..., -1]
    return out


def _cdf53_neighbours_s(s, nd):
    # s[i+1] for i in [0, nd); the right edge reflects onto s[nd-1]
    if s.shape[-1] > nd:
        return s[..., 1 : nd + 1]
    return np.concatenate([s[..., 1:], s[..., -1:]], axis=-1)


def _cdf53_neighbours_d(d, ns):
    # (d[i-1], d[i]) for i in [0, ns); d[-1] reflects onto d[0] and, for odd
    # lengths, d[ns-1] reflects onto d[ns-2]
    prev = np.concatenate([d[..., :1], d[..., : ns - 1]], axis=-1)
    cur = d if d.shape[-1] == ns else np.concatenate([d, d[..., -1:]], axis=-1)
    return prev, cur


def _cdf53_forward(x):
    s = x[..., 0::2].copy()
    d = x[..., 1::2].copy()
    ns, nd = s.shape[-1], d.shape[-1]
    d -= (s[..., :nd] + _cdf53_neighbours_s(s, nd)) >> 1
    prev, cur = _cdf53_neighbours_d(d, ns)
    s += (prev + cur + 2) >> 2
    return s, d


def _cdf53_inverse(s, d, n):
    s = s.copy()
    d = d.copy()
    ns, nd = s.shape[-1], d.shape[-1]
    prev, cur = _cdf53_neighbours_d(d, ns)
    s -= (prev + cur + 2) >> 2
    d += (s[..., :nd] + _cdf53_neighbours_s(s, nd)) >> 1
    out = np.empty(s.shape[:-1] + (n,), dtype=np.int64)
    out[..., 0::2] = s
    out[..., 1::2] = d
    return out


@dataclass(frozen=True)
class LiftingScheme:
    forward: Callable
    inverse: Callable


_SCHEMES: dict[WaveletId, LiftingScheme] = {
    WaveletId.HAAR_S: LiftingScheme(_haar_forward, _haar_inverse),
    WaveletId.CDF22_53: LiftingScheme(_cdf53_forward, _cdf53_inverse),
}


def register_scheme(wavelet, forward, inverse) -> None:
    """Register a further lifting scheme under ``wavelet``.

    ``forward(x)`` must split the last axis (length >= 2) into
    ``ceil(n/2)`` approximation and ``floor(n/2)`` detail samples, and
    ``inverse(s, d, n)`` must undo it exactly.
    """
    _SCHEMES[wavelet] = LiftingScheme(forward, inverse)


def _scheme(wavelet) -> LiftingScheme:
    try:
        return _SCHEMES[wavelet]
    except KeyError:
        raise ValueError(f"no lifting scheme registered for {wavelet!r}") from None


def _lift_forward(x: np.ndarray, wavelet):
    n = x.shape[-1]
    if n == 1:
        return x.copy(), x[..., :0].copy()
    return _scheme(wavelet).forward(x)


def _lift_inverse(s: np.ndarray, d: np.ndarray, wavelet, n: int):
    if s.shape[-1] != (n + 1) // 2 or d.shape[-1] != n // 2:
        raise LengthMismatch(
            f"bands of length {s.shape[-1]}/{d.shape[-1]} do not split a signal of length {n}"
        )
    if n == 1:
        return s.copy()
    return _scheme(wavelet).inverse(s, d, n)


def forward_1d(signal, wavelet):
    """Split an integer signal into (approx, detail) integer arrays."""
    x = np.asarray(signal, dtype=np.int64)
    if x.ndim != 1:
        raise ValueError("forward_1d expects a 1-D signal")
    if x.size == 0:
        raise EmptySignal("cannot transform an empty signal")
    return _lift_forward(x, wavelet)


def inverse_1d(approx, detail, wavelet, original_length: int):
    s = np.asarray(approx, dtype=np.int64)
    d = np.asarray(detail, dtype=np.int64)
    if original_length < 1:
        raise LengthMismatch("original_length must be at least 1")
    return _lift_inverse(s, d, wavelet, original_length)


# --- 2-D transform -------------------------------------------------------

@dataclass
class DetailLevel:
    level: int
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    def band(self, tag: Subband) -> np.ndarray:
        return (self.lh, self.hl, self.hh)[tag]

    def set_band(self, tag: Subband, plane: np.ndarray) -> None:
        setattr(self, ("lh", "hl", "hh")[tag], plane)


@dataclass
class SubbandSet:
    """Integer coefficient planes of a multi-level decomposition.

    ``details[0]`` is level 1, the finest scale.
    """

    wavelet: WaveletId
    levels: int
    ll: np.ndarray
    details: list[DetailLevel] = field(default_factory=list)
    original_width: int = 0
    original_height: int = 0

    def band(self, tag: Subband, level: int) -> np.ndarray:
        return self.details[level - 1].band(tag)

    def set_band(self, tag: Subband, level: int, plane: np.ndarray) -> None:
        self.details[level - 1].set_band(tag, plane)

    def bands(self):
        """Yield ``(tag, level, plane)`` for every detail band, finest first."""
        for dl in self.details:
            for tag in Subband:
                yield tag, dl.level, dl.band(tag)

    def copy(self) -> "SubbandSet":
        return SubbandSet(
            self.wavelet,
            self.levels,
            self.ll.copy(),
            [DetailLevel(d.level, d.lh.copy(), d.hl.copy(), d.hh.copy()) for d in self.details],
            self.original_width,
            self.original_height,
        )


def level_shapes(height: int, width: int, levels: int):
    """Shape of the approximation plane entering each level, finest first."""
    shapes = []
    h, w = height, width
    for _ in range(levels):
        shapes.append((h, w))
        h, w = (h + 1) // 2, (w + 1) // 2
    return shapes


def max_levels(height: int, width: int) -> int:
    levels = 0
    h, w = height, width
    while h >= 2 and w >= 2:
        levels += 1
        h, w = (h + 1) // 2, (w + 1) // 2
    return levels


def forward_iwt(img, wavelet, levels: int = 1) -> SubbandSet:
    """Separable multi-level forward transform: rows first, then columns."""
    pixels = img.pixels if hasattr(img, "pixels") else img
    plane = np.asarray(pixels, dtype=np.int64)
    if plane.ndim != 2:
        raise ValueError("forward_iwt expects a 2-D image")
    if levels < 1:
        raise TooManyLevels("levels must be at least 1")
    height, width = plane.shape
    if levels > max_levels(height, width):
        raise TooManyLevels(
            f"{levels} levels requested but a {width}x{height} image supports "
            f"at most {max_levels(height, width)}"
        )

    details = []
    for lvl in range(1, levels + 1):
        lo, hi = _lift_forward(plane, wavelet)
        ll, hl = (b.T for b in _lift_forward(lo.T, wavelet))
        lh, hh = (b.T for b in _lift_forward(hi.T, wavelet))
        details.append(DetailLevel(lvl, lh.copy(), hl.copy(), hh.copy()))
        plane = ll.copy()
    return SubbandSet(wavelet, levels, plane, details, width, height)


def inverse_iwt(sb: SubbandSet) -> np.ndarray:
    """Rebuild the integer plane; values are returned unclamped."""
    if len(sb.details) != sb.levels:
        raise InconsistentDimensions(
            f"{len(sb.details)} detail levels present, {sb.levels} declared"
        )
    shapes = level_shapes(sb.original_height, sb.original_width, sb.levels)
    plane = np.asarray(sb.ll, dtype=np.int64)
    for dl, (h, w) in zip(reversed(sb.details), reversed(shapes)):
        hs, hd, ws, wd = (h + 1) // 2, h // 2, (w + 1) // 2, w // 2
        expected = {"ll": (hs, ws), "lh": (hs, wd), "hl": (hd, ws), "hh": (hd, wd)}
        got = {"ll": plane.shape, "lh": dl.lh.shape, "hl": dl.hl.shape, "hh": dl.hh.shape}
        if got != expected:
            raise InconsistentDimensions(
                f"level {dl.level}: band shapes {got} do not match {expected}"
            )
        lo = _lift_inverse(plane.T, np.asarray(dl.hl, dtype=np.int64).T, sb.wavelet, h).T
        hi = _lift_inverse(
            np.asarray(dl.lh, dtype=np.int64).T, np.asarray(dl.hh, dtype=np.int64).T, sb.wavelet, h
        ).T
        plane = _lift_inverse(lo, hi, sb.wavelet, w)
    return np.ascontiguousarray(plane)
