"""Histogram-shifting embedding and extraction in the integer wavelet domain.

Embedding opens an empty bin next to a peak value ``P`` of a detail
subband histogram (by shifting everything beyond it one step outward),
then walks the subband in raster order: every coefficient equal to ``P``
carries one payload bit, left as ``P`` for a 0 and moved into the empty
bin for a 1. Further passes repeat this on the next bin outward, and
subbands are visited round-robin until the payload is placed.

Extraction replays the recorded passes in reverse order, reading bits and
closing each opened bin, which restores the coefficients and hence the
cover image exactly.
"""

from __future__ import annotations

import enum
import logging
import struct
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BitCountExhausted,
    ChecksumMismatch,
    DimensionMismatch,
    InsufficientCapacity,
    KeyFormatError,
    PixelRangeOverflow,
    TooManyLevels,
    ZeroPointOccupied,
)
from .histogram import build_histogram, find_peak, shift_left, shift_right
from .image_io import GrayImage
from .lifting import Subband, SubbandSet, WaveletId, forward_iwt, inverse_iwt

log = logging.getLogger(__name__)


class Direction(enum.IntEnum):
    RIGHT = 0
    LEFT = 1

    @property
    def step(self) -> int:
        return 1 if self is Direction.RIGHT else -1


class Schedule(enum.IntEnum):
    RIGHT_ONLY = 0
    ALTERNATE = 1


# --- payload bits --------------------------------------------------------

def bits_from_bytes(data: bytes) -> np.ndarray:
    """Unpack bytes into a 0/1 array, MSB first."""
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))


def bits_to_bytes(bits) -> bytes:
    """Pack a 0/1 array MSB first; the last byte is zero-padded."""
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def as_bits(payload) -> np.ndarray:
    if isinstance(payload, (bytes, bytearray, memoryview)):
        return bits_from_bytes(payload)
    bits = np.asarray(payload, dtype=np.uint8).ravel()
    if bits.size and bits.max() > 1:
        raise ValueError("payload bits must be 0 or 1")
    return bits


def payload_crc(bits) -> int:
    return zlib.crc32(bits_to_bytes(bits)) & 0xFFFFFFFF


# --- records -------------------------------------------------------------

@dataclass(frozen=True)
class PassRecord:
    subband: Subband
    level: int
    direction: Direction
    peak: int
    bits_embedded: int


@dataclass
class SideInfo:
    """Everything extraction needs besides the marked image itself."""

    wavelet: WaveletId
    levels: int
    side_schedule: Schedule
    narrowing_margin: int
    payload_length_bits: int
    payload_checksum: int
    pass_list: list[PassRecord] = field(default_factory=list)
    narrowing_map: list[tuple[int, int]] = field(default_factory=list)

    def to_bytes(self) -> bytes:
        return write_key(self)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SideInfo":
        return read_key(data)


@dataclass
class EmbedConfig:
    wavelet: WaveletId = WaveletId.CDF22_53
    levels: int = 1
    # None means every detail band, finest level first, LH/HL/HH within a level
    subband_order: list[tuple[Subband, int]] | None = None
    side_schedule: Schedule = Schedule.RIGHT_ONLY
    max_passes_per_subband: int = 64
    narrowing_margin: int = 0
    # re-pick the most populated remaining bin each pass instead of stepping outward
    auto_peak: bool = False

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("levels must be at least 1")
        if self.max_passes_per_subband < 1:
            raise ValueError("max_passes_per_subband must be at least 1")
        if not 0 <= self.narrowing_margin <= 32:
            raise ValueError("narrowing_margin must lie in [0, 32]")

    def order(self) -> list[tuple[Subband, int]]:
        if self.subband_order is not None:
            order = [(Subband(t), int(lvl)) for t, lvl in self.subband_order]
            if len(set(order)) != len(order):
                raise ValueError("subband_order lists a band twice")
            for _, lvl in order:
                if not 1 <= lvl <= self.levels:
                    raise ValueError(f"subband level {lvl} outside 1..{self.levels}")
            return order
        return [(tag, lvl) for lvl in range(1, self.levels + 1) for tag in Subband]


# --- key file ------------------------------------------------------------

_KEY_MAGIC = b"RHK1"
_KEY_HEAD = struct.Struct("<4sBBBBQIH")
_KEY_PASS = struct.Struct("<BBBiI")
_KEY_COUNT = struct.Struct("<I")
_KEY_ENTRY = struct.Struct("<IB")


def write_key(side: SideInfo) -> bytes:
    """Serialize side information to the little-endian ``RHK1`` layout."""
    if len(side.pass_list) > 0xFFFF:
        raise KeyFormatError("too many passes for the key format")
    out = [
        _KEY_HEAD.pack(
            _KEY_MAGIC,
            int(side.wavelet),
            side.levels,
            int(side.side_schedule),
            side.narrowing_margin,
            side.payload_length_bits,
            side.payload_checksum,
            len(side.pass_list),
        )
    ]
    for p in side.pass_list:
        out.append(_KEY_PASS.pack(int(p.subband), p.level, int(p.direction), p.peak, p.bits_embedded))
    out.append(_KEY_COUNT.pack(len(side.narrowing_map)))
    for idx, value in side.narrowing_map:
        out.append(_KEY_ENTRY.pack(idx, value))
    return b"".join(out)


def read_key(data: bytes) -> SideInfo:
    data = bytes(data)
    try:
        magic, wav, levels, sched, margin, nbits, crc, npass = _KEY_HEAD.unpack_from(data, 0)
        if magic != _KEY_MAGIC:
            raise KeyFormatError(f"bad key magic {magic!r}")
        off = _KEY_HEAD.size
        passes = []
        for _ in range(npass):
            tag, lvl, direction, peak, count = _KEY_PASS.unpack_from(data, off)
            off += _KEY_PASS.size
            passes.append(PassRecord(Subband(tag), lvl, Direction(direction), peak, count))
        (nmap,) = _KEY_COUNT.unpack_from(data, off)
        off += _KEY_COUNT.size
        nmap_entries = [_KEY_ENTRY.unpack_from(data, off + i * _KEY_ENTRY.size) for i in range(nmap)]
        off += nmap * _KEY_ENTRY.size
        side = SideInfo(
            WaveletId(wav), levels, Schedule(sched), margin, nbits, crc, passes,
            [(int(i), int(v)) for i, v in nmap_entries],
        )
    except struct.error as exc:
        raise KeyFormatError(f"truncated key: {exc}") from None
    except ValueError as exc:
        raise KeyFormatError(f"invalid key field: {exc}") from None
    if off != len(data):
        raise KeyFormatError(f"{len(data) - off} trailing bytes after key")
    if sum(p.bits_embedded for p in passes) != nbits:
        raise KeyFormatError("pass bit counts do not add up to the payload length")
    return side


# --- pixel narrowing -----------------------------------------------------

def narrow_pixels(img: GrayImage, margin: int):
    """Pull pixels within ``margin`` of either end of [0, 255] inward by ``margin``.

    Returns the narrowed image and the ``(index, original value)`` list
    needed to undo it.
    """
    if not 0 <= margin <= 32:
        raise ValueError("margin must lie in [0, 32]")
    if margin == 0:
        return img, []
    flat = img.pixels.ravel().astype(np.int16)
    low = flat < margin
    high = flat > 255 - margin
    idx = np.flatnonzero(low | high)
    mapping = [(int(i), int(flat[i])) for i in idx]
    out = flat.copy()
    out[low] += margin
    out[high] -= margin
    return GrayImage(out.reshape(img.pixels.shape)), mapping


def restore_pixels(plane: np.ndarray, mapping) -> np.ndarray:
    out = np.array(plane, copy=True)
    flat = out.reshape(-1)
    for idx, value in mapping:
        flat[idx] = value
    return out


# --- single pass ---------------------------------------------------------

def open_zero_point(plane, peak: int, direction: Direction) -> np.ndarray:
    """Shift the histogram beyond ``peak`` outward so ``peak ± 1`` is empty."""
    if direction is Direction.RIGHT:
        return shift_right(plane, peak + 1)
    return shift_left(plane, peak - 1, below=True)


def close_zero_point(plane, peak: int, direction: Direction) -> np.ndarray:
    if direction is Direction.RIGHT:
        return shift_left(plane, peak + 2)
    return shift_right(plane, peak - 2, below=True)


def embed_pass(plane, peak: int, direction, bits):
    """Write bits into the ``peak``-valued coefficients of an opened plane.

    Returns ``(plane, bits_consumed)``.
    """
    direction = Direction(direction)
    plane = np.array(plane, dtype=np.int64, copy=True)
    bits = np.asarray(bits, dtype=np.int64).ravel()
    target = peak + direction.step
    if np.count_nonzero(plane == target) != 0:
        raise ZeroPointOccupied(f"bin {target} is not empty; open the zero point first")
    flat = plane.reshape(-1)
    carriers = np.flatnonzero(flat == peak)
    k = min(carriers.size, bits.size)
    flat[carriers[:k]] += bits[:k] * direction.step
    return plane, k


def extract_pass(plane, peak: int, direction, expected_bits: int):
    """Read one pass's bits and undo that pass.

    Returns ``(plane, bits)`` where ``plane`` is the state before the pass
    opened its zero point.
    """
    direction = Direction(direction)
    plane = np.array(plane, dtype=np.int64, copy=True)
    flat = plane.reshape(-1)
    marked = peak + direction.step
    carriers = np.flatnonzero((flat == peak) | (flat == marked))
    if carriers.size < expected_bits:
        raise BitCountExhausted(
            f"pass at peak {peak} expects {expected_bits} bits, found {carriers.size} carriers"
        )
    sel = carriers[:expected_bits]
    bits = (flat[sel] == marked).astype(np.uint8)
    flat[sel] = peak
    return close_zero_point(plane, peak, direction), bits


# --- planning ------------------------------------------------------------

class _BandPlanner:
    """Tracks which original histogram bins a subband has used on each side.

    Passes on one side never touch bins on the other side of the initial
    peak, and every right (left) pass moves all still-unused bins above
    (below) it one step outward. So the current position of an unused
    original bin ``v`` is ``v + right_done`` or ``v - left_done``.
    """

    def __init__(self, tag, level, plane, auto_peak):
        self.tag = tag
        self.level = level
        self.hist = build_histogram(plane)
        self.auto_peak = auto_peak
        self.passes = 0
        if self.hist:
            p0 = find_peak(self.hist).value
            self.lo, self.hi = min(self.hist), max(self.hist)
        else:
            p0, self.lo, self.hi = 0, 0, -1
        self.next_right = p0
        self.next_left = p0 - 1
        self.right_done = 0
        self.left_done = 0

    def _candidate(self, direction):
        if direction is Direction.RIGHT:
            values = range(self.next_right, self.hi + 1)
        else:
            values = range(self.next_left, self.lo - 1, -1)
        best = None
        for v in values:
            c = self.hist.get(v, 0)
            if c == 0:
                continue
            if not self.auto_peak:
                return v, c
            if best is None or c > best[1]:
                best = (v, c)
        return best

    def take(self, direction):
        """Consume the next bin on ``direction``; returns (current peak, count) or None."""
        cand = self._candidate(direction)
        if cand is None:
            return None
        v, count = cand
        if direction is Direction.RIGHT:
            peak = v + self.right_done
            self.right_done += 1
            self.next_right = v + 1
        else:
            peak = v - self.left_done
            self.left_done += 1
            self.next_left = v - 1
        self.passes += 1
        return peak, count


def plan_passes(sb: SubbandSet, payload_bits, cfg: EmbedConfig) -> list[PassRecord]:
    """Lay out embedding passes for ``payload_bits`` bits.

    With ``payload_bits=None`` the plan runs until every band is exhausted
    or hits ``cfg.max_passes_per_subband``, each pass filled to capacity.
    """
    if payload_bits is not None and payload_bits < 0:
        raise ValueError("payload size must be non-negative")
    if sb.levels < max((lvl for _, lvl in cfg.order()), default=1):
        raise TooManyLevels("configuration names a level the decomposition lacks")
    remaining = payload_bits
    planners = [
        _BandPlanner(tag, lvl, sb.band(tag, lvl), cfg.auto_peak) for tag, lvl in cfg.order()
    ]
    active = list(planners)
    plan: list[PassRecord] = []
    total = 0
    while active and remaining != 0:
        still = []
        for bp in active:
            if remaining == 0:
                break
            if bp.passes >= cfg.max_passes_per_subband:
                continue
            if cfg.side_schedule is Schedule.ALTERNATE:
                first = Direction.RIGHT if bp.passes % 2 == 0 else Direction.LEFT
                sides = (first, Direction(1 - first))
            else:
                sides = (Direction.RIGHT,)
            got = None
            for direction in sides:
                got = bp.take(direction)
                if got is not None:
                    break
            if got is None:
                continue
            peak, count = got
            n = count if remaining is None else min(count, remaining)
            plan.append(PassRecord(bp.tag, bp.level, direction, peak, n))
            total += n
            if remaining is not None:
                remaining -= n
            still.append(bp)
        active = still
    if remaining:
        # the loop only runs dry once every pass was filled to capacity
        raise InsufficientCapacity(payload_bits, total)
    return plan


# --- full pipeline -------------------------------------------------------

@dataclass(frozen=True)
class AuditEntry:
    subband: Subband
    level: int
    direction: Direction
    peak: int
    zero_bin_count: int


def _apply_passes(sb: SubbandSet, plan, bits, audit=None) -> None:
    cursor = 0
    for p in plan:
        plane = open_zero_point(sb.band(p.subband, p.level), p.peak, p.direction)
        if audit is not None:
            zero_bin = p.peak + p.direction.step
            audit.append(
                AuditEntry(p.subband, p.level, p.direction, p.peak,
                           int(np.count_nonzero(plane == zero_bin)))
            )
        plane, used = embed_pass(plane, p.peak, p.direction, bits[cursor : cursor + p.bits_embedded])
        if used != p.bits_embedded:
            raise RuntimeError(
                f"pass planned {p.bits_embedded} bits at peak {p.peak} but placed {used}"
            )
        cursor += used
        sb.set_band(p.subband, p.level, plane)


def embed(img: GrayImage, payload, cfg: EmbedConfig | None = None, audit=None):
    """Hide ``payload`` (bytes or a 0/1 array) in ``img``.

    Returns ``(marked image, SideInfo)``. Pass a list as ``audit`` to
    collect an :class:`AuditEntry` for every zero point opened.
    """
    cfg = cfg or EmbedConfig()
    bits = as_bits(payload)
    side = SideInfo(
        cfg.wavelet, cfg.levels, cfg.side_schedule, cfg.narrowing_margin,
        int(bits.size), payload_crc(bits),
    )
    if bits.size == 0:
        return img, side

    work, mapping = narrow_pixels(img, cfg.narrowing_margin)
    sb = forward_iwt(work, cfg.wavelet, cfg.levels)
    plan = plan_passes(sb, int(bits.size), cfg)
    _apply_passes(sb, plan, bits, audit)
    plane = inverse_iwt(sb)

    lo, hi = int(plane.min()), int(plane.max())
    if lo < 0 or hi > 255:
        bad = int(np.count_nonzero((plane < 0) | (plane > 255)))
        raise PixelRangeOverflow(bad, lo, hi)

    side.pass_list = plan
    side.narrowing_map = mapping
    log.debug("embedded %d bits in %d passes", bits.size, len(plan))
    return GrayImage(plane), side


def extract(marked: GrayImage, side: SideInfo, undo_order: str = "reverse"):
    """Recover ``(payload bits, original image)`` from a marked image.

    ``undo_order="forward"`` replays passes in embedding order instead; it
    exists only to demonstrate that doing so corrupts multi-pass data.
    """
    if side.narrowing_map and max(i for i, _ in side.narrowing_map) >= marked.size:
        raise DimensionMismatch("narrowing map indexes pixels outside the image")
    if sum(p.bits_embedded for p in side.pass_list) != side.payload_length_bits:
        raise DimensionMismatch("pass ledger does not account for the payload length")
    if side.payload_length_bits == 0:
        return np.zeros(0, dtype=np.uint8), marked

    try:
        sb = forward_iwt(marked, side.wavelet, side.levels)
    except TooManyLevels as exc:
        raise DimensionMismatch(str(exc)) from None
    for p in side.pass_list:
        if not 1 <= p.level <= side.levels:
            raise DimensionMismatch(f"pass references level {p.level} of {side.levels}")

    indices = range(len(side.pass_list))
    if undo_order == "reverse":
        indices = reversed(indices)
    elif undo_order != "forward":
        raise ValueError(f"undo_order must be 'reverse' or 'forward', got {undo_order!r}")
    segments = [None] * len(side.pass_list)
    for i in indices:
        p = side.pass_list[i]
        plane, segments[i] = extract_pass(
            sb.band(p.subband, p.level), p.peak, p.direction, p.bits_embedded
        )
        sb.set_band(p.subband, p.level, plane)
    payload = np.concatenate(segments).astype(np.uint8)

    if payload_crc(payload) != side.payload_checksum:
        raise ChecksumMismatch("extracted payload fails its CRC-32 check")

    plane = inverse_iwt(sb)
    if plane.min() < 0 or plane.max() > 255:
        bad = int(np.count_nonzero((plane < 0) | (plane > 255)))
        raise PixelRangeOverflow(bad, int(plane.min()), int(plane.max()))
    plane = restore_pixels(plane, side.narrowing_map)
    return payload, GrayImage(plane)


def embed_min_margin(img: GrayImage, payload, cfg: EmbedConfig | None = None,
                     margins=range(0, 33), audit=None):
    """Embed with the smallest narrowing margin that avoids pixel overflow.

    ``cfg.narrowing_margin`` is ignored; margins are tried in the given
    order. Raises the last :class:`PixelRangeOverflow` if none fits.
    """
    cfg = cfg or EmbedConfig()
    last = None
    for margin in margins:
        trial = replace(cfg, narrowing_margin=margin)
        entries = [] if audit is not None else None
        try:
            result = embed(img, payload, trial, audit=entries)
        except PixelRangeOverflow as exc:
            last = exc
            continue
        if audit is not None:
            audit.extend(entries)
        return result
    if last is None:
        raise ValueError("no margins to try")
    raise last


# --- capacity ------------------------------------------------------------

@dataclass
class CapacityReport:
    passes: list[PassRecord]
    total_bits: int
    pixels: int

    @property
    def bpp(self) -> float:
        return self.total_bits / self.pixels


def capacity(img: GrayImage, cfg: EmbedConfig | None = None) -> CapacityReport:
    """Bits each planned pass could carry when the payload is unbounded.

    Pixel-range overflow is not considered; a payload this large may still
    be rejected by :func:`embed`.
    """
    cfg = cfg or EmbedConfig()
    work, _ = narrow_pixels(img, cfg.narrowing_margin)
    sb = forward_iwt(work, cfg.wavelet, cfg.levels)
    plan = plan_passes(sb, None, cfg)
    return CapacityReport(plan, sum(p.bits_embedded for p in plan), img.size)
