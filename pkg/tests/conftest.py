import sys
from pathlib import Path

import numpy as np
import pytest

from iwtmark.codec import embed, embed_min_margin, extract
from iwtmark.image_io import GrayImage

sys.path.insert(0, str(Path(__file__).parent))


def smooth_image(rng, height, width, noise=2.0):
    """Photo-like synthetic image: a few low-frequency waves plus mild noise."""
    yy, xx = np.mgrid[0:height, 0:width]
    field = np.zeros((height, width))
    for _ in range(4):
        fy, fx = rng.uniform(0.2, 3.0, 2) * 2 * np.pi / np.array([height, width])
        field += rng.uniform(10, 40) * np.cos(fy * yy + fx * xx + rng.uniform(0, 2 * np.pi))
    field += rng.normal(0, noise, (height, width))
    field = 128 + field * (90 / max(1e-9, np.abs(field).max()))
    return GrayImage(np.clip(np.round(field), 0, 255).astype(np.uint8))


def roundtrip(img, bits, cfg, auto_margin=False):
    """Embed with the zero-point audit on, extract, and check both outputs exactly."""
    audit = []
    if auto_margin:
        marked, side = embed_min_margin(img, bits, cfg, audit=audit)
    else:
        marked, side = embed(img, bits, cfg, audit=audit)
    assert all(a.zero_bin_count == 0 for a in audit)
    assert len(audit) == len(side.pass_list)
    payload, restored = extract(marked, side)
    assert np.array_equal(payload, np.asarray(bits, dtype=np.uint8))
    assert restored == img
    return marked, side


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def camera():
    data = pytest.importorskip("skimage.data")
    return GrayImage(data.camera())


def flip_payload_bit(marked, side, pass_index, carrier_index):
    """Flip one embedded bit in the coefficient domain and rebuild the image.

    Returns None when the rebuilt image leaves [0, 255].
    """
    from iwtmark.lifting import forward_iwt, inverse_iwt

    p = side.pass_list[pass_index]
    sb = forward_iwt(marked, side.wavelet, side.levels)
    plane = sb.band(p.subband, p.level)
    flat = plane.reshape(-1)
    marked_value = p.peak + p.direction.step
    carriers = np.flatnonzero((flat == p.peak) | (flat == marked_value))[: p.bits_embedded]
    k = carriers[carrier_index]
    flat[k] = p.peak if flat[k] == marked_value else marked_value
    out = inverse_iwt(sb)
    if out.min() < 0 or out.max() > 255:
        return None
    return GrayImage(out)


ACCEPTANCE_LINES: list[str] = []


def report(label, ok, detail=""):
    """Record one acceptance verdict; all verdicts print in the terminal summary."""
    line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def note(line):
    """Informative line shown under the verdicts; never affects the outcome."""
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
