"""Canonical Huffman tables as stored in DHT segments."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tables
from .errors import JpegEncodeError, JpegParseError


@dataclass(frozen=True)
class HuffmanTable:
    """``bits[k]`` codes of length ``k + 1``, assigned canonically to ``values``."""

    bits: tuple[int, ...]
    values: tuple[int, ...]
    table_class: str = "dc"
    table_id: int = 0
    _codes: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        values = tuple(int(v) for v in self.values)
        if len(bits) != 16:
            raise ValueError(f"need 16 code-length counts, got {len(bits)}")
        if sum(bits) != len(values):
            raise ValueError(f"sum(bits)={sum(bits)} does not match {len(values)} values")
        if len(set(values)) != len(values):
            raise ValueError("duplicate symbols in Huffman table")
        if any(not 0 <= v <= 255 for v in values):
            raise ValueError("Huffman symbols must be bytes")
        if self.table_class not in ("dc", "ac"):
            raise ValueError(f"table class must be 'dc' or 'ac', got {self.table_class!r}")
        if not 0 <= self.table_id <= 3:
            raise ValueError(f"table id must be 0..3, got {self.table_id}")
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_codes", self._assign_codes())

    def _assign_codes(self) -> dict[int, tuple[int, int]]:
        codes = {}
        code = 0
        k = 0
        for length in range(1, 17):
            for _ in range(self.bits[length - 1]):
                codes[self.values[k]] = (code, length)
                code += 1
                k += 1
            if code > (1 << length):
                raise ValueError(f"code lengths oversubscribed at length {length}")
            code <<= 1
        # the all-ones code of the longest length is reserved
        if codes:
            last_code, last_len = codes[self.values[-1]]
            if last_code == (1 << last_len) - 1:
                raise ValueError("Huffman table assigns an all-ones code")
        return codes

    @property
    def codes(self) -> dict[int, tuple[int, int]]:
        """symbol -> (code, length)."""
        return dict(self._codes)

    def code_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Encoder lookup: code[symbol], length[symbol] (length 0 = absent)."""
        code = np.zeros(256, dtype=np.int64)
        size = np.zeros(256, dtype=np.int64)
        for sym, (c, n) in self._codes.items():
            code[sym] = c
            size[sym] = n
        return code, size

    def lookup_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Decoder lookup indexed by the next 16 bits: (code length, symbol)."""
        length = np.zeros(1 << 16, dtype=np.int32)
        symbol = np.zeros(1 << 16, dtype=np.int32)
        for sym, (c, n) in self._codes.items():
            lo = c << (16 - n)
            hi = (c + 1) << (16 - n)
            length[lo:hi] = n
            symbol[lo:hi] = sym
        return length, symbol

    def segment_payload(self) -> bytes:
        tc = 0 if self.table_class == "dc" else 1
        return bytes([tc << 4 | self.table_id, *self.bits, *self.values])


def standard_tables() -> dict[tuple[str, int], HuffmanTable]:
    """Annex K tables keyed by (class, id): id 0 luma, id 1 chroma."""
    return {
        ("dc", 0): HuffmanTable(*tables.DC_LUMA_SPEC, "dc", 0),
        ("ac", 0): HuffmanTable(*tables.AC_LUMA_SPEC, "ac", 0),
        ("dc", 1): HuffmanTable(*tables.DC_CHROMA_SPEC, "dc", 1),
        ("ac", 1): HuffmanTable(*tables.AC_CHROMA_SPEC, "ac", 1),
    }


def optimal_table(freqs, table_class: str = "dc", table_id: int = 0) -> HuffmanTable:
    """Length-limited (16 bit) table for symbol frequencies, per Annex K.2.

    ``freqs`` has 256 entries. A reserved pseudo-symbol keeps any real code
    from being all ones.
    """
    freq = np.zeros(257, dtype=np.int64)
    freq[:256] = np.asarray(freqs, dtype=np.int64)
    if freq[:256].sum() == 0:
        raise JpegEncodeError("cannot build a Huffman table with no symbols")
    freq[256] = 1
    codesize = np.zeros(257, dtype=np.int64)
    others = np.full(257, -1, dtype=np.int64)
    f = freq.astype(np.float64)
    f[f == 0] = np.inf
    while True:
        # smallest frequency, ties broken toward the larger symbol as in K.2
        c1 = -1
        v = np.inf
        for i in range(257):
            if f[i] != np.inf and f[i] <= v:
                v = f[i]
                c1 = i
        c2 = -1
        v = np.inf
        for i in range(257):
            if f[i] != np.inf and f[i] <= v and i != c1:
                v = f[i]
                c2 = i
        if c2 < 0:
            break
        f[c1] += f[c2]
        f[c2] = np.inf
        while True:
            codesize[c1] += 1
            if others[c1] < 0:
                break
            c1 = others[c1]
        others[c1] = c2
        while True:
            codesize[c2] += 1
            if others[c2] < 0:
                break
            c2 = others[c2]
    bits = np.zeros(33, dtype=np.int64)
    for i in range(257):
        if codesize[i]:
            bits[codesize[i]] += 1
    # K.3: limit code lengths to 16
    i = 32
    while i > 16:
        while bits[i] > 0:
            j = i - 2
            while bits[j] == 0:
                j -= 1
            bits[i] -= 2
            bits[i - 1] += 1
            bits[j + 1] += 2
            bits[j] -= 1
        i -= 1
    while bits[i] == 0:
        i -= 1
    bits[i] -= 1  # drop the reserved pseudo-symbol
    values = []
    for size in range(1, 33):
        for sym in range(256):
            if codesize[sym] == size:
                values.append(sym)
    return HuffmanTable(tuple(int(b) for b in bits[1:17]), tuple(values), table_class, table_id)


def parse_dht(payload: bytes, offset: int = 0) -> list[HuffmanTable]:
    out = []
    pos = 0
    while pos < len(payload):
        if pos + 17 > len(payload):
            raise JpegParseError("truncated DHT segment", offset + pos)
        tc, th = payload[pos] >> 4, payload[pos] & 15
        if tc > 1 or th > 3:
            raise JpegParseError(f"bad DHT class/id {tc}/{th}", offset + pos)
        bits = tuple(payload[pos + 1 : pos + 17])
        n = sum(bits)
        if pos + 17 + n > len(payload):
            raise JpegParseError("truncated DHT symbol list", offset + pos)
        values = tuple(payload[pos + 17 : pos + 17 + n])
        try:
            out.append(HuffmanTable(bits, values, "dc" if tc == 0 else "ac", th))
        except ValueError as exc:
            raise JpegParseError(f"invalid Huffman table: {exc}", offset + pos) from exc
        pos += 17 + n
    return out
