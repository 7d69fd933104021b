"""PSNR-versus-payload benchmark over a directory of PGM images.

Every cell embeds a prefix of one seeded pseudorandom bit stream, checks
that extraction returns both payload and cover exactly, and records the
PSNR. Cells where the payload does not fit are reported as ``xxx``.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .codec import EmbedConfig, embed, embed_min_margin, extract
from .errors import InsufficientCapacity, PixelRangeOverflow
from .image_io import GrayImage, load_pgm
from .lifting import WaveletId, wavelet_name
from .metrics import format_psnr, psnr

log = logging.getLogger(__name__)

FAILED = "xxx"
HEADER = ["image", "wavelet", "payload_bits", "bpp", "psnr_db", "passes", "points_used"]
POINTS_HEADER = ["image", "wavelet", "points_used", "payload_bits", "psnr_db"]


@dataclass(frozen=True)
class PayloadSpec:
    """A requested payload, either a bit rate or an explicit bit count."""

    bpp: float | None = None
    bits: int | None = None

    def count(self, img: GrayImage) -> int:
        if self.bits is not None:
            return self.bits
        return int(round(self.bpp * img.size))

    @property
    def label(self) -> str:
        return str(self.bits) if self.bits is not None else f"{self.bpp:g}"


@dataclass(frozen=True)
class BenchRow:
    image: str
    wavelet: str
    payload_bits: int
    bpp: float
    psnr_db: float | None  # None when the cell failed
    passes: int | None
    points_used: int | None
    margin: int | None = None

    @property
    def failed(self) -> bool:
        return self.psnr_db is None

    def csv_fields(self) -> list[str]:
        if self.failed:
            return [self.image, self.wavelet, str(self.payload_bits), f"{self.bpp:.6f}", FAILED, "", ""]
        return [
            self.image, self.wavelet, str(self.payload_bits), f"{self.bpp:.6f}",
            format_psnr(self.psnr_db), str(self.passes), str(self.points_used),
        ]


def payload_stream(seed: int, nbits: int) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, 2, size=nbits, dtype=np.uint8)


def points_used(pass_list) -> int:
    """Distinct histogram bins used as embedding peaks."""
    return len({p.peak for p in pass_list})


def run_cell(name: str, img: GrayImage, cfg: EmbedConfig, bits: np.ndarray, margin="auto") -> BenchRow:
    """Embed, verify the round trip, and measure one table cell."""
    wname = wavelet_name(cfg.wavelet)
    n = int(bits.size)
    try:
        if margin == "auto":
            marked, side = embed_min_margin(img, bits, cfg)
        else:
            marked, side = embed(img, bits, cfg)
    except (InsufficientCapacity, PixelRangeOverflow) as exc:
        log.info("%s/%s/%d bits: %s", name, wname, n, type(exc).__name__)
        return BenchRow(name, wname, n, n / img.size, None, None, None)

    payload, restored = extract(marked, side)
    if not (np.array_equal(payload, bits) and restored == img):
        raise RuntimeError(f"round trip failed for {name}/{wname}/{n} bits")
    return BenchRow(
        name, wname, n, n / img.size, psnr(img, marked),
        len(side.pass_list), points_used(side.pass_list), side.narrowing_margin,
    )


def _cell_task(args):
    return run_cell(*args)


def run_bench(images: dict[str, GrayImage], wavelets, payloads, *, seed: int = 42,
              levels: int = 1, margin="auto", jobs: int = 1, **cfg_kwargs) -> list[BenchRow]:
    """Run every (image, wavelet, payload) cell; rows come back sorted."""
    tasks = []
    for name, img in images.items():
        counts = [spec.count(img) for spec in payloads]
        stream = payload_stream(seed, max(counts, default=0))
        for wavelet in wavelets:
            cfg = EmbedConfig(
                wavelet=WaveletId(wavelet), levels=levels,
                narrowing_margin=0 if margin == "auto" else int(margin), **cfg_kwargs,
            )
            for n in counts:
                tasks.append((name, img, cfg, stream[:n], margin))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_cell_task, tasks))
    else:
        rows = [_cell_task(t) for t in tasks]
    return sorted(rows, key=lambda r: (r.image, r.wavelet, r.payload_bits))


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


def points_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(POINTS_HEADER)
    for r in rows:
        if not r.failed:
            w.writerow([r.image, r.wavelet, r.points_used, r.payload_bits, format_psnr(r.psnr_db)])
    return buf.getvalue()


def table_to_csv(rows, payloads, images: dict[str, GrayImage]) -> str:
    """Pivot into the printed-table layout: one row per payload, one column per image/wavelet."""
    wavelets = sorted({r.wavelet for r in rows})
    columns = [(name, wv) for name in sorted(images) for wv in wavelets]
    cells = {(r.image, r.wavelet, r.payload_bits): r for r in rows}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    unit = "Payload (bits)" if payloads and payloads[0].bits is not None else "Payload (bpp)"
    w.writerow([unit] + [f"{name} {wv} PSNR (dB)" for name, wv in columns])
    for spec in payloads:
        line = [spec.label]
        for name, wv in columns:
            cell = cells.get((name, wv, spec.count(images[name])))
            line.append(FAILED if cell is None or cell.failed else format_psnr(cell.psnr_db))
        w.writerow(line)
    return buf.getvalue()


def load_corpus(directory) -> dict[str, GrayImage]:
    paths = sorted(Path(directory).glob("*.pgm"))
    if not paths:
        raise FileNotFoundError(f"no .pgm files in {directory}")
    return {p.stem: load_pgm(p) for p in paths}
