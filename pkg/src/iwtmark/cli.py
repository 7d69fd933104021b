"""Command-line interface.

    iwtmark embed   --in cover.pgm --payload msg.bin --out marked.pgm --key marked.rhk
    iwtmark extract --in marked.pgm --key marked.rhk --out-payload msg.bin --out-image cover.pgm
    iwtmark analyze --in cover.pgm
    iwtmark bench   --corpus imgs/ --wavelets cdf53,haar --bpp-list 0.1,0.2 --out table.csv
    iwtmark dump    --in cover.pgm --out-dir planes/

Exit codes: 0 success, 1 I/O or parse error, 2 capacity or pixel overflow
while embedding, 3 integrity failure while extracting.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench
from .codec import (
    EmbedConfig,
    Schedule,
    SideInfo,
    bits_to_bytes,
    capacity,
    embed,
    embed_min_margin,
    extract,
    narrow_pixels,
)
from .errors import (
    BitCountExhausted,
    ChecksumMismatch,
    DimensionMismatch,
    InsufficientCapacity,
    IWTMarkError,
    KeyFormatError,
    PGMError,
    PixelRangeOverflow,
)
from .histogram import build_histogram
from .image_io import GrayImage, load_pgm, save_pgm
from .lifting import forward_iwt, wavelet_from_name, wavelet_name
from .metrics import bpp, format_psnr, psnr

EXIT_IO = 1
EXIT_EMBED = 2
EXIT_INTEGRITY = 3

SCHEDULES = {"right": Schedule.RIGHT_ONLY, "alternate": Schedule.ALTERNATE}


def _margin(text: str):
    if text == "auto":
        return "auto"
    value = int(text)
    if not 0 <= value <= 32:
        raise argparse.ArgumentTypeError("margin must be 'auto' or an integer in [0, 32]")
    return value


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _add_transform_args(p, margin=True):
    p.add_argument("--wavelet", type=wavelet_from_name, default="cdf53",
                   help="haar or cdf53 (default cdf53)")
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--schedule", choices=sorted(SCHEDULES), default="right")
    p.add_argument("--max-passes", type=int, default=64,
                   help="passes allowed per subband (default 64)")
    p.add_argument("--auto-peak", action="store_true",
                   help="pick the fullest remaining bin each pass instead of the next one out")
    if margin:
        p.add_argument("--margin", type=_margin, default=0,
                       help="pixel narrowing margin G, or 'auto' for the smallest that fits")


def _config(args, margin=0) -> EmbedConfig:
    return EmbedConfig(
        wavelet=args.wavelet,
        levels=args.levels,
        side_schedule=SCHEDULES[args.schedule],
        max_passes_per_subband=args.max_passes,
        narrowing_margin=margin,
        auto_peak=args.auto_peak,
    )


def cmd_embed(args) -> int:
    img = load_pgm(args.input)
    payload = Path(args.payload).read_bytes()
    try:
        if args.margin == "auto":
            marked, side = embed_min_margin(img, payload, _config(args))
        else:
            marked, side = embed(img, payload, _config(args, args.margin))
    except InsufficientCapacity as exc:
        print(f"InsufficientCapacity: {exc}; achievable {exc.capacity} bits", file=sys.stderr)
        return EXIT_EMBED
    except PixelRangeOverflow as exc:
        print(f"PixelRangeOverflow: {exc}", file=sys.stderr)
        return EXIT_EMBED
    save_pgm(args.out, marked)
    Path(args.key).write_bytes(side.to_bytes())
    n = side.payload_length_bits
    print(f"{n},{bpp(n, img):.6f},{format_psnr(psnr(img, marked))}")
    return 0


def cmd_extract(args) -> int:
    marked = load_pgm(args.input)
    side = SideInfo.from_bytes(Path(args.key).read_bytes())
    try:
        bits, restored = extract(marked, side)
    except (ChecksumMismatch, BitCountExhausted, PixelRangeOverflow, DimensionMismatch) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    Path(args.out_payload).write_bytes(bits_to_bytes(bits))
    save_pgm(args.out_image, restored)
    return 0


def cmd_analyze(args) -> int:
    img = load_pgm(args.input)
    cfg = _config(args, 0 if args.margin == "auto" else args.margin)
    work, _ = narrow_pixels(img, cfg.narrowing_margin)
    sb = forward_iwt(work, cfg.wavelet, cfg.levels)

    with _open_out(args.hist_out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subband", "level", "value", "count"])
        for tag, level, plane in sb.bands():
            for value, count in sorted(build_histogram(plane).items()):
                w.writerow([tag.name, level, value, count])

    report = capacity(img, cfg)
    with _open_out(args.capacity_out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subband", "level", "direction", "peak", "capacity_bits"])
        for p in report.passes:
            w.writerow([p.subband.name, p.level, p.direction.name, p.peak, p.bits_embedded])
        w.writerow(["TOTAL", "", "", "", report.total_bits])
        w.writerow(["BPP", "", "", "", f"{report.bpp:.6f}"])
    return 0


def cmd_bench(args) -> int:
    images = bench.load_corpus(args.corpus)
    wavelets = [wavelet_from_name(w) for w in args.wavelets.split(",") if w.strip()]
    if args.bits_list is not None:
        payloads = [bench.PayloadSpec(bits=n) for n in _int_list(args.bits_list)]
    else:
        payloads = [bench.PayloadSpec(bpp=b) for b in _float_list(args.bpp_list)]
    rows = bench.run_bench(
        images, wavelets, payloads, seed=args.seed, levels=args.levels, margin=args.margin,
        jobs=args.jobs, side_schedule=SCHEDULES[args.schedule],
        max_passes_per_subband=args.max_passes, auto_peak=args.auto_peak,
    )
    out = Path(args.out)
    out.write_text(bench.rows_to_csv(rows))
    points_out = Path(args.points_out) if args.points_out else out.with_name(out.stem + "_points.csv")
    points_out.write_text(bench.points_to_csv(rows))
    table_out = Path(args.table_out) if args.table_out else out.with_name(out.stem + "_table.csv")
    table_out.write_text(bench.table_to_csv(rows, payloads, images))
    failed = sum(r.failed for r in rows)
    print(f"{len(rows)} cells, {failed} {bench.FAILED}; wrote {out}, {points_out}, {table_out}")
    return 0


def cmd_dump(args) -> int:
    img = load_pgm(args.input)
    sb = forward_iwt(img, args.wavelet, args.levels)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "LL.csv", sb.ll, fmt="%d", delimiter=",")
    for tag, level, plane in sb.bands():
        np.savetxt(out / f"{tag.name}{level}.csv", plane, fmt="%d", delimiter=",")
    print(f"{wavelet_name(sb.wavelet)}: wrote {1 + 3 * sb.levels} planes to {out}")
    return 0


def cmd_sample_corpus(args) -> int:
    try:
        from skimage import color, data, util
    except ImportError:
        print("sample-corpus needs scikit-image (pip install scikit-image)", file=sys.stderr)
        return EXIT_IO
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    samples = {
        "cameraman": data.camera(),
        "moon": data.moon(),
        "brick": data.brick(),
        "astronaut": util.img_as_ubyte(color.rgb2gray(data.astronaut())),
    }
    for name, arr in samples.items():
        save_pgm(out / f"{name}.pgm", GrayImage(arr))
    print(f"wrote {len(samples)} images to {out}")
    return 0


class _open_out:
    """Context manager yielding a file for ``path`` or stdout for None / '-'."""

    def __init__(self, path):
        self.path = path
        self.fh = None

    def __enter__(self):
        if self.path in (None, "-"):
            return sys.stdout
        self.fh = open(self.path, "w", newline="")
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not None:
            self.fh.close()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iwtmark", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="hide a payload file in a PGM image")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--payload", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--key", required=True)
    _add_transform_args(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="recover the payload and the original image")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--out-payload", required=True)
    p.add_argument("--out-image", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="subband histograms and capacity report")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--hist-out", help="histogram CSV path (default stdout)")
    p.add_argument("--capacity-out", help="capacity CSV path (default stdout)")
    _add_transform_args(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bench", help="PSNR versus payload over a PGM corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--wavelets", default="cdf53")
    p.add_argument("--bpp-list", default="0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5,0.55")
    p.add_argument("--bits-list", help="explicit payload sizes in bits; overrides --bpp-list")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.add_argument("--points-out", help="points-used CSV (default <out>_points.csv)")
    p.add_argument("--table-out", help="pivoted table CSV (default <out>_table.csv)")
    p.add_argument("--jobs", type=int, default=1)
    _add_transform_args(p, margin=False)
    p.add_argument("--margin", type=_margin, default="auto",
                   help="pixel narrowing margin G, or 'auto' (default)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("dump", help="write every coefficient plane as CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--wavelet", type=wavelet_from_name, default="cdf53")
    p.add_argument("--levels", type=int, default=1)
    p.set_defaults(func=cmd_dump)

    p = sub.add_parser("sample-corpus", help="export scikit-image sample photos as PGM")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_sample_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (OSError, PGMError, KeyFormatError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO
    except IWTMarkError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
