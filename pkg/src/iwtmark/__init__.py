"""Reversible image data hiding by histogram shifting in the integer wavelet domain."""

from .codec import (
    Direction,
    EmbedConfig,
    PassRecord,
    Schedule,
    SideInfo,
    bits_to_bytes,
    capacity,
    embed,
    embed_min_margin,
    extract,
)
from .image_io import GrayImage, load_pgm, read_pgm, save_pgm, write_pgm
from .lifting import Subband, SubbandSet, WaveletId, forward_iwt, inverse_iwt
from .metrics import psnr

__all__ = [
    "Direction", "EmbedConfig", "GrayImage", "PassRecord", "Schedule", "SideInfo",
    "Subband", "SubbandSet", "WaveletId", "bits_to_bytes", "capacity", "embed", "embed_min_margin",
    "extract", "forward_iwt", "inverse_iwt", "load_pgm", "psnr", "read_pgm",
    "save_pgm", "write_pgm",
]

__version__ = "0.1.0"
