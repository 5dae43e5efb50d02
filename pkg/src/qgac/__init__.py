"""Quantization-guided JPEG artifact correction in the DCT domain."""

__version__ = "0.1.0"
