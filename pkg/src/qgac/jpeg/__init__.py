"""Baseline JPEG codec with direct access to DCT coefficients."""

from .codec import (
    CoefficientPlane,
    JpegImage,
    decode_jpeg_coefficients,
    decode_jpeg_pixels,
    encode_jpeg,
    encode_planes,
    entropy_decode_scan,
    entropy_encode_scan,
    inspect_jpeg,
    parse_jpeg,
    planes_to_pixels,
    read_jpeg,
    write_jpeg,
)
from .color import (
    pad_to_mcu,
    rgb_to_ycbcr,
    subsample_chroma,
    upsample_chroma,
    ycbcr_to_rgb,
)
from .dct import (
    dct_forward_block,
    dct_inverse_block,
    dct_plane,
    dequantize_block,
    idct_plane,
    quantize_block,
    zigzag_scan,
    zigzag_unscan,
)
from .errors import JpegEncodeError, JpegError, JpegParseError, JpegUnsupportedError
from .huffman import HuffmanTable, optimal_table, standard_tables
from .tables import QuantMatrix, quality_to_tables

__all__ = [
    "CoefficientPlane",
    "HuffmanTable",
    "JpegEncodeError",
    "JpegError",
    "JpegImage",
    "JpegParseError",
    "JpegUnsupportedError",
    "QuantMatrix",
    "dct_forward_block",
    "dct_inverse_block",
    "dct_plane",
    "decode_jpeg_coefficients",
    "decode_jpeg_pixels",
    "dequantize_block",
    "encode_jpeg",
    "encode_planes",
    "entropy_decode_scan",
    "entropy_encode_scan",
    "idct_plane",
    "inspect_jpeg",
    "optimal_table",
    "pad_to_mcu",
    "parse_jpeg",
    "planes_to_pixels",
    "quality_to_tables",
    "quantize_block",
    "read_jpeg",
    "rgb_to_ycbcr",
    "standard_tables",
    "subsample_chroma",
    "upsample_chroma",
    "write_jpeg",
    "ycbcr_to_rgb",
    "zigzag_scan",
    "zigzag_unscan",
]
