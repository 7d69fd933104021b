import csv

import numpy as np
import pytest

from conftest import smooth_image

from iwtmark.cli import main
from iwtmark.codec import SideInfo
from iwtmark.image_io import GrayImage, load_pgm, save_pgm


@pytest.fixture
def cover(tmp_path):
    img = smooth_image(np.random.default_rng(30), 64, 64, noise=3)
    path = tmp_path / "cover.pgm"
    save_pgm(path, img)
    return path


def _run(*argv):
    return main([str(a) for a in argv])


@pytest.mark.parametrize("wavelet, levels", [("haar", 1), ("cdf53", 1), ("cdf53", 2)])
def test_embed_extract_roundtrip(tmp_path, cover, capsys, wavelet, levels):
    payload = np.random.default_rng(31).bytes(60)
    (tmp_path / "msg.bin").write_bytes(payload)
    rc = _run("embed", "--in", cover, "--payload", tmp_path / "msg.bin", "--out", tmp_path / "m.pgm",
              "--key", tmp_path / "m.rhk", "--wavelet", wavelet, "--levels", levels, "--margin", "auto")
    assert rc == 0
    bits, rate, db = capsys.readouterr().out.strip().split(",")
    assert int(bits) == 480 and float(rate) == pytest.approx(480 / 4096, abs=1e-6)
    assert 30 < float(db) < 80

    side = SideInfo.from_bytes((tmp_path / "m.rhk").read_bytes())
    assert side.levels == levels

    rc = _run("extract", "--in", tmp_path / "m.pgm", "--key", tmp_path / "m.rhk",
              "--out-payload", tmp_path / "out.bin", "--out-image", tmp_path / "restored.pgm")
    assert rc == 0
    assert (tmp_path / "out.bin").read_bytes() == payload
    assert (tmp_path / "restored.pgm").read_bytes() == cover.read_bytes()


def test_empty_payload_leaves_image_byte_identical(tmp_path, cover):
    (tmp_path / "empty.bin").write_bytes(b"")
    rc = _run("embed", "--in", cover, "--payload", tmp_path / "empty.bin", "--out", tmp_path / "m.pgm",
              "--key", tmp_path / "m.rhk")
    assert rc == 0
    assert (tmp_path / "m.pgm").read_bytes() == cover.read_bytes()


def test_oversized_payload_exit_2(tmp_path, cover, capsys):
    (tmp_path / "big.bin").write_bytes(bytes(4096))
    rc = _run("embed", "--in", cover, "--payload", tmp_path / "big.bin", "--out", tmp_path / "m.pgm",
              "--key", tmp_path / "m.rhk")
    assert rc == 2
    err = capsys.readouterr().err
    assert "InsufficientCapacity" in err and "achievable" in err
    assert not (tmp_path / "m.pgm").exists()


def test_overflow_exit_2(tmp_path, capsys):
    img = GrayImage(np.tile(np.array([[0, 255], [255, 0]], np.uint8), (8, 8)))
    save_pgm(tmp_path / "c.pgm", img)
    (tmp_path / "msg.bin").write_bytes(b"\xff" * 7)
    rc = _run("embed", "--in", tmp_path / "c.pgm", "--payload", tmp_path / "msg.bin",
              "--out", tmp_path / "m.pgm", "--key", tmp_path / "m.rhk", "--wavelet", "haar")
    assert rc == 2
    assert "PixelRangeOverflow" in capsys.readouterr().err


def test_tampered_image_exit_3(tmp_path, cover, capsys):
    (tmp_path / "msg.bin").write_bytes(b"integrity matters")
    _run("embed", "--in", cover, "--payload", tmp_path / "msg.bin", "--out", tmp_path / "m.pgm",
         "--key", tmp_path / "m.rhk")
    marked = load_pgm(tmp_path / "m.pgm")
    side = SideInfo.from_bytes((tmp_path / "m.rhk").read_bytes())
    from conftest import flip_payload_bit

    save_pgm(tmp_path / "t.pgm", flip_payload_bit(marked, side, 0, 0))
    rc = _run("extract", "--in", tmp_path / "t.pgm", "--key", tmp_path / "m.rhk",
              "--out-payload", tmp_path / "o.bin", "--out-image", tmp_path / "o.pgm")
    assert rc == 3
    assert "ChecksumMismatch" in capsys.readouterr().err


def test_io_errors_exit_1(tmp_path, cover):
    assert _run("extract", "--in", tmp_path / "missing.pgm", "--key", tmp_path / "k",
                "--out-payload", tmp_path / "o", "--out-image", tmp_path / "o.pgm") == 1
    (tmp_path / "bad.pgm").write_bytes(b"P7\n")
    assert _run("analyze", "--in", tmp_path / "bad.pgm") == 1
    (tmp_path / "bad.rhk").write_bytes(b"nope")
    assert _run("extract", "--in", cover, "--key", tmp_path / "bad.rhk",
                "--out-payload", tmp_path / "o", "--out-image", tmp_path / "o.pgm") == 1


def test_analyze_constant_image(tmp_path, capsys):
    save_pgm(tmp_path / "c.pgm", GrayImage(np.full((16, 16), 50, np.uint8)))
    assert _run("analyze", "--in", tmp_path / "c.pgm", "--hist-out", tmp_path / "h.csv") == 0
    rows = list(csv.DictReader((tmp_path / "h.csv").open()))
    assert len(rows) == 3
    assert all(r["value"] == "0" and r["count"] == "64" for r in rows)
    cap = capsys.readouterr().out.strip().splitlines()
    assert cap[-2] == "TOTAL,,,,192"


def test_analyze_capacity_consistent_with_codec(tmp_path, cover, capsys):
    from iwtmark.codec import EmbedConfig, capacity

    assert _run("analyze", "--in", cover, "--hist-out", tmp_path / "h.csv") == 0
    lines = capsys.readouterr().out.strip().splitlines()
    total = int(lines[-2].split(",")[-1])
    assert total == capacity(load_pgm(cover), EmbedConfig()).total_bits
    rows = list(csv.DictReader((tmp_path / "h.csv").open()))
    assert sum(int(r["count"]) for r in rows) == 3 * 32 * 32


def test_dump_planes(tmp_path, cover, capsys):
    assert _run("dump", "--in", cover, "--out-dir", tmp_path / "planes", "--levels", "2") == 0
    names = sorted(p.name for p in (tmp_path / "planes").iterdir())
    assert names == ["HH1.csv", "HH2.csv", "HL1.csv", "HL2.csv", "LH1.csv", "LH2.csv", "LL.csv"]
    ll = np.loadtxt(tmp_path / "planes" / "LL.csv", delimiter=",", dtype=np.int64)
    assert ll.shape == (16, 16)


def test_bench_smoke(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    save_pgm(corpus / "tiny.pgm", smooth_image(np.random.default_rng(32), 32, 32))
    out = tmp_path / "bench.csv"
    assert _run("bench", "--corpus", corpus, "--wavelets", "haar,cdf53", "--bpp-list", "0.05",
                "--out", out) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2
    assert {r["wavelet"] for r in rows} == {"haar", "cdf53"}
    assert all(r["payload_bits"] == "51" and r["psnr_db"] != "xxx" for r in rows)
    assert (tmp_path / "bench_points.csv").exists()
    table = list(csv.reader((tmp_path / "bench_table.csv").open()))
    assert table[0] == ["Payload (bpp)", "tiny cdf53 PSNR (dB)", "tiny haar PSNR (dB)"]
    assert table[1][0] == "0.05"


def test_bench_empty_bpp_list(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    save_pgm(corpus / "tiny.pgm", smooth_image(np.random.default_rng(33), 16, 16))
    out = tmp_path / "b.csv"
    assert _run("bench", "--corpus", corpus, "--bpp-list", "", "--out", out) == 0
    assert out.read_text() == "image,wavelet,payload_bits,bpp,psnr_db,passes,points_used\n"


def test_bench_bits_list_and_determinism(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    save_pgm(corpus / "a.pgm", smooth_image(np.random.default_rng(34), 48, 48, noise=3))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["bench", "--corpus", corpus, "--bits-list", "100,400,900,5000", "--seed", "7"]
    assert _run(*args, "--out", a) == 0
    assert _run(*args, "--out", b, "--jobs", "2") == 0
    assert a.read_text() == b.read_text()
    rows = list(csv.DictReader(a.open()))
    assert rows[-1]["psnr_db"] == "xxx" and rows[-1]["passes"] == ""
    pts = [int(r["points_used"]) for r in rows if r["psnr_db"] != "xxx"]
    assert pts == sorted(pts)


def test_bench_missing_corpus(tmp_path):
    assert _run("bench", "--corpus", tmp_path / "nothing", "--out", tmp_path / "x.csv") == 1


def test_module_entry_point(tmp_path, cover):
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "iwtmark", "analyze", "--in", str(cover),
                          "--hist-out", str(tmp_path / "h.csv")], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("subband,level,direction,peak,capacity_bits")
