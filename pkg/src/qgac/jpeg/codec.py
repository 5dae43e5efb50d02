"""JFIF file writing and parsing, coefficient access and pixel decoding."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from . import color
from .dct import (
    ZIGZAG,
    dct_plane,
    dequantize_plane,
    idct_plane,
    quantize_plane,
    zigzag_scan,
    zigzag_unscan,
    plane_to_blocks,
    blocks_to_plane,
)
from .entropy import DecodeComponent, ScanComponent, decode_scan, encode_scan
from .errors import JpegParseError, JpegUnsupportedError, JpegEncodeError
from .huffman import HuffmanTable, parse_dht, standard_tables
from .tables import QuantMatrix, quality_to_tables

SOI, EOI, SOS, DQT, DHT, DRI, COM = 0xD8, 0xD9, 0xDA, 0xDB, 0xC4, 0xDD, 0xFE
SOF0, SOF1 = 0xC0, 0xC1

_UNSUPPORTED_SOF = {
    0xC2: "progressive unsupported",
    0xC3: "lossless unsupported",
    0xC5: "hierarchical (differential sequential) unsupported",
    0xC6: "hierarchical (differential progressive) unsupported",
    0xC7: "hierarchical (differential lossless) unsupported",
    0xC9: "arithmetic coding unsupported",
    0xCA: "progressive arithmetic coding unsupported",
    0xCB: "lossless arithmetic coding unsupported",
    0xCD: "arithmetic coding unsupported",
    0xCE: "arithmetic coding unsupported",
    0xCF: "arithmetic coding unsupported",
}


@dataclass
class CoefficientPlane:
    """DCT coefficients of one channel laid out as an (H, W) plane.

    Block (r, c) sits at rows 8r..8r+7, columns 8c..8c+7. ``values`` is int32
    when ``quantized`` and float64 otherwise.
    """

    values: np.ndarray
    quant: QuantMatrix
    quantized: bool = True

    def __post_init__(self):
        h, w = self.values.shape
        if h % 8 or w % 8:
            raise ValueError(f"coefficient plane dims must be multiples of 8, got {self.values.shape}")

    @property
    def block_rows(self) -> int:
        return self.values.shape[0] // 8

    @property
    def block_cols(self) -> int:
        return self.values.shape[1] // 8

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def dequantized(self) -> CoefficientPlane:
        if not self.quantized:
            return self
        return CoefficientPlane(dequantize_plane(self.values, self.quant), self.quant, quantized=False)

    def with_values(self, values: np.ndarray) -> CoefficientPlane:
        return CoefficientPlane(np.asarray(values, dtype=np.float64), self.quant, quantized=False)


@dataclass
class JpegImage:
    """Coefficient planes of a decoded or to-be-encoded image.

    ``sampling`` holds the (h, v) factor of each component. Plane dims cover
    whole MCUs, so they can exceed ``width``/``height``.
    """

    y: CoefficientPlane
    cb: CoefficientPlane | None = None
    cr: CoefficientPlane | None = None
    width: int = 0
    height: int = 0
    sampling: tuple[tuple[int, int], ...] = ((1, 1),)

    @property
    def planes(self) -> list[CoefficientPlane]:
        return [p for p in (self.y, self.cb, self.cr) if p is not None]

    @property
    def is_color(self) -> bool:
        return self.cb is not None

    @property
    def subsampling(self) -> str:
        if not self.is_color:
            return "gray"
        (hy, vy), (hb, vb), (hr, vr) = self.sampling
        if (hb, vb) != (hr, vr):
            return "other"
        ratio = (hy // hb, vy // vb) if hy % hb == 0 and vy % vb == 0 else None
        return {(1, 1): "4:4:4", (2, 2): "4:2:0", (2, 1): "4:2:2", (1, 2): "4:4:0"}.get(ratio, "other")

    def dequantized(self) -> JpegImage:
        return JpegImage(
            *(p.dequantized() if p is not None else None for p in (self.y, self.cb, self.cr)),
            width=self.width,
            height=self.height,
            sampling=self.sampling,
        )


def _sampling_for(subsampling: str) -> tuple[tuple[int, int], ...]:
    if subsampling == "4:2:0":
        return ((2, 2), (1, 1), (1, 1))
    if subsampling == "4:4:4":
        return ((1, 1), (1, 1), (1, 1))
    raise ValueError(f"subsampling must be '4:2:0' or '4:4:4', got {subsampling!r}")


def forward_plane(samples: np.ndarray, q: QuantMatrix) -> CoefficientPlane:
    """Center, transform and quantize a padded 8-bit plane.

    The transform output is rounded to integers before the truncating
    division, so unit divisors lose nothing beyond that rounding.
    """
    coeffs = color.round_half_away(dct_plane(samples.astype(np.float64) - 128.0))
    return CoefficientPlane(quantize_plane(coeffs, q), q, quantized=True)


def encode_planes(image: np.ndarray, quality: int = 75, subsampling: str = "4:2:0") -> JpegImage:
    """Run the lossy part of compression and return the quantized planes.

    ``image`` is (H, W, 3) RGB or (H, W) grayscale uint8.
    """
    image = np.asarray(image)
    if image.dtype != np.uint8:
        raise ValueError(f"expected uint8 samples, got {image.dtype}")
    if image.ndim == 3 and image.shape[2] == 1:
        image = image[..., 0]
    if image.ndim not in (2, 3) or (image.ndim == 3 and image.shape[2] != 3):
        raise ValueError(f"expected (H, W) or (H, W, 3) image, got {image.shape}")
    height, width = image.shape[:2]
    if not (0 < width <= 0xFFFF and 0 < height <= 0xFFFF):
        raise ValueError(f"image dims {width}x{height} do not fit a 16-bit frame header")
    q_luma, q_chroma = quality_to_tables(quality)
    if image.ndim == 2:
        return JpegImage(
            forward_plane(color.pad_to_mcu(image, 8), q_luma), width=width, height=height,
            sampling=((1, 1),),
        )
    sampling = _sampling_for(subsampling)
    mcu = 16 if subsampling == "4:2:0" else 8
    y, cb, cr = color.rgb_to_ycbcr(image[..., 0], image[..., 1], image[..., 2])
    y, cb, cr = (color.pad_to_mcu(p, mcu) for p in (y, cb, cr))
    if subsampling == "4:2:0":
        cb, cr = color.subsample_chroma(cb), color.subsample_chroma(cr)
    return JpegImage(
        forward_plane(y, q_luma),
        forward_plane(cb, q_chroma),
        forward_plane(cr, q_chroma),
        width=width,
        height=height,
        sampling=sampling,
    )


# --- writing ----------------------------------------------------------------


def _segment(marker: int, payload: bytes) -> bytes:
    if len(payload) + 2 > 0xFFFF:
        raise JpegEncodeError(f"segment 0x{marker:02X} too long")
    return struct.pack(">BBH", 0xFF, marker, len(payload) + 2) + payload


def _mcu_order(blocks: np.ndarray, h: int, v: int) -> np.ndarray:
    """(rows, cols, 64) block grid -> (n, 64) in interleaved-MCU order."""
    rows, cols = blocks.shape[:2]
    grid = blocks.reshape(rows // v, v, cols // h, h, 64).transpose(0, 2, 1, 3, 4)
    return grid.reshape(-1, 64)


def _table_ids(n_planes: int) -> list[int]:
    return [0] + [1] * (n_planes - 1)


def entropy_encode_scan(img: JpegImage, huffman: dict | None = None) -> bytes:
    """Entropy-coded segment of one interleaved baseline scan over all planes.

    Luma uses table id 0 and chroma id 1 (both classes).
    """
    if huffman is None:
        huffman = standard_tables()
    planes = img.planes
    if any(not p.quantized for p in planes):
        raise JpegEncodeError("entropy coding needs quantized planes")
    comps = []
    pattern = []
    single = len(planes) == 1
    for i, (p, (h, v), t) in enumerate(zip(planes, img.sampling, _table_ids(len(planes)))):
        zz = zigzag_scan(plane_to_blocks(p.values))
        blocks = zz.reshape(-1, 64) if single else _mcu_order(zz, h, v)
        comps.append(ScanComponent(blocks, huffman[("dc", t)], huffman[("ac", t)]))
        pattern += [i] * (1 if single else h * v)
    return encode_scan(comps, pattern)


def entropy_decode_scan(
    data: bytes,
    huffman: dict | None,
    width: int,
    height: int,
    sampling: tuple[tuple[int, int], ...] = ((1, 1),),
    quants: list[QuantMatrix] | None = None,
) -> JpegImage:
    """Inverse of :func:`entropy_encode_scan` for a frame of the given layout.

    ``quants`` only labels the returned planes; it defaults to all-ones tables.
    """
    if huffman is None:
        huffman = standard_tables()
    hmax = max(h for h, _ in sampling)
    vmax = max(v for _, v in sampling)
    mcux = -(-width // (8 * hmax))
    mcuy = -(-height // (8 * vmax))
    comps = [
        DecodeComponent(h, v, mcux * h, mcuy * v, huffman[("dc", t)], huffman[("ac", t)])
        for (h, v), t in zip(sampling, _table_ids(len(sampling)))
    ]
    if len(comps) == 1:
        nx, ny = comps[0].blocks_w, comps[0].blocks_h
    else:
        nx, ny = mcux, mcuy
    buf = np.frombuffer(bytes(data), dtype=np.uint8)
    decoded = decode_scan(buf, 0, len(buf), comps, nx, ny)
    if quants is None:
        ones = np.ones((8, 8), dtype=np.int32)
        quants = [QuantMatrix(ones, "luma" if i == 0 else "chroma") for i in range(len(sampling))]
    planes = [CoefficientPlane(blocks_to_plane(zigzag_unscan(b)), q, quantized=True) for b, q in zip(decoded, quants)]
    return JpegImage(
        planes[0],
        planes[1] if len(planes) > 1 else None,
        planes[2] if len(planes) > 2 else None,
        width=width,
        height=height,
        sampling=tuple(sampling),
    )


def write_jpeg(img: JpegImage, huffman: dict | None = None) -> bytes:
    """Serialize quantized planes as a baseline JFIF file."""
    if huffman is None:
        huffman = standard_tables()
    planes = img.planes
    if any(not p.quantized for p in planes):
        raise JpegEncodeError("write_jpeg needs quantized planes")
    out = bytearray(b"\xff\xd8")
    out += _segment(0xE0, b"JFIF\x00" + bytes([1, 1, 0, 0, 1, 0, 1, 0, 0]))
    qtables: list[QuantMatrix] = []
    for p in planes:
        if p.quant not in qtables:
            qtables.append(p.quant)
    dqt = b"".join(bytes([i]) + bytes(q.entries.reshape(64)[ZIGZAG].astype(np.uint8)) for i, q in enumerate(qtables))
    out += _segment(DQT, dqt)
    sof = struct.pack(">BHHB", 8, img.height, img.width, len(planes))
    for i, (p, (h, v)) in enumerate(zip(planes, img.sampling)):
        sof += bytes([i + 1, h << 4 | v, qtables.index(p.quant)])
    out += _segment(SOF0, sof)
    table_ids = _table_ids(len(planes))
    used = sorted({(cls, t) for t in table_ids for cls in ("dc", "ac")})
    out += _segment(DHT, b"".join(huffman[key].segment_payload() for key in used))
    sos = bytes([len(planes)])
    for i, t in enumerate(table_ids):
        sos += bytes([i + 1, t << 4 | t])
    sos += bytes([0, 63, 0])
    out += _segment(SOS, sos)

    out += entropy_encode_scan(img, huffman)
    out += b"\xff\xd9"
    return bytes(out)


def encode_jpeg(image: np.ndarray, quality: int = 75, subsampling: str = "4:2:0") -> bytes:
    """Compress an 8-bit RGB or grayscale image to baseline JFIF bytes."""
    return write_jpeg(encode_planes(image, quality, subsampling))


# --- parsing ----------------------------------------------------------------


@dataclass
class _Frame:
    width: int
    height: int
    components: list[dict] = field(default_factory=list)
    hmax: int = 1
    vmax: int = 1
    mcux: int = 0
    mcuy: int = 0


@dataclass
class MarkerInfo:
    marker: int
    offset: int
    length: int

    @property
    def name(self) -> str:
        return marker_name(self.marker)


def marker_name(marker: int) -> str:
    names = {SOI: "SOI", EOI: "EOI", SOS: "SOS", DQT: "DQT", DHT: "DHT", DRI: "DRI", COM: "COM", 0xCC: "DAC"}
    if marker in names:
        return names[marker]
    if 0xC0 <= marker <= 0xCF:
        return f"SOF{marker - 0xC0}"
    if 0xD0 <= marker <= 0xD7:
        return f"RST{marker - 0xD0}"
    if 0xE0 <= marker <= 0xEF:
        return f"APP{marker - 0xE0}"
    return f"0x{marker:02X}"


def _find_scan_end(buf: np.ndarray, start: int) -> int:
    """Offset of the first non-RST marker at or after ``start``."""
    tail = buf[start:]
    ff = np.flatnonzero(tail[:-1] == 0xFF)
    nxt = tail[ff + 1]
    is_marker = (nxt != 0x00) & (nxt != 0xFF) & ((nxt < 0xD0) | (nxt > 0xD7))
    hits = ff[is_marker]
    return start + int(hits[0]) if hits.size else len(buf)


@dataclass
class ParsedJpeg:
    image: JpegImage
    quant_tables: dict[int, QuantMatrix]
    markers: list[MarkerInfo]
    restart_interval: int = 0


def parse_jpeg(data: bytes) -> ParsedJpeg:
    """Parse a baseline file down to quantized coefficient planes."""
    data = bytes(data)
    buf = np.frombuffer(data, dtype=np.uint8)
    if len(data) < 4 or data[0] != 0xFF or data[1] != SOI:
        raise JpegParseError("missing SOI marker", 0)
    markers = [MarkerInfo(SOI, 0, 0)]
    qraw: dict[int, np.ndarray] = {}
    huff: dict[tuple[str, int], HuffmanTable] = {}
    frame: _Frame | None = None
    comp_blocks: list[np.ndarray] = []
    restart = 0
    pos = 2
    seen_eoi = False
    while pos < len(data):
        if data[pos] != 0xFF:
            raise JpegParseError("expected a marker", pos)
        while pos + 1 < len(data) and data[pos + 1] == 0xFF:
            pos += 1  # fill bytes
        if pos + 1 >= len(data):
            raise JpegParseError("truncated marker", pos)
        marker = data[pos + 1]
        if marker == EOI:
            markers.append(MarkerInfo(EOI, pos, 0))
            seen_eoi = True
            break
        if 0xD0 <= marker <= 0xD7 or marker == 0x01:
            markers.append(MarkerInfo(marker, pos, 0))
            pos += 2
            continue
        if pos + 4 > len(data):
            raise JpegParseError(f"truncated {marker_name(marker)} header", pos)
        (length,) = struct.unpack(">H", data[pos + 2 : pos + 4])
        if length < 2 or pos + 2 + length > len(data):
            raise JpegParseError(f"truncated {marker_name(marker)} segment", pos)
        payload = data[pos + 4 : pos + 2 + length]
        markers.append(MarkerInfo(marker, pos, length))
        seg_start = pos + 4
        pos += 2 + length
        if marker in _UNSUPPORTED_SOF:
            raise JpegUnsupportedError(f"{marker_name(marker)}: {_UNSUPPORTED_SOF[marker]}")
        if marker == 0xCC:
            raise JpegUnsupportedError("DAC: arithmetic coding unsupported")
        if marker == DQT:
            p = 0
            while p < len(payload):
                pq, tq = payload[p] >> 4, payload[p] & 15
                n = 64 * (pq + 1)
                if p + 1 + n > len(payload) or pq > 1 or tq > 3:
                    raise JpegParseError("malformed DQT segment", seg_start + p)
                dt = ">u2" if pq else "u1"
                zz = np.frombuffer(payload[p + 1 : p + 1 + n], dtype=dt).astype(np.int32)
                qraw[tq] = zigzag_unscan(zz)
                p += 1 + n
        elif marker == DHT:
            for t in parse_dht(payload, seg_start):
                huff[(t.table_class, t.table_id)] = t
        elif marker == DRI:
            if len(payload) != 2:
                raise JpegParseError("malformed DRI segment", seg_start)
            (restart,) = struct.unpack(">H", payload)
        elif marker in (SOF0, SOF1):
            if frame is not None:
                raise JpegParseError("multiple frames", seg_start)
            if len(payload) < 6:
                raise JpegParseError("truncated SOF segment", seg_start)
            precision, height, width, nf = struct.unpack(">BHHB", payload[:6])
            if precision != 8:
                raise JpegUnsupportedError(f"{precision}-bit unsupported (only 8-bit samples)")
            if nf not in (1, 3):
                raise JpegUnsupportedError(f"{nf}-component images unsupported")
            if height == 0:
                raise JpegUnsupportedError("DNL-defined height unsupported")
            if width == 0 or len(payload) < 6 + 3 * nf:
                raise JpegParseError("malformed SOF segment", seg_start)
            frame = _Frame(width, height)
            for i in range(nf):
                cid, hv, tq = payload[6 + 3 * i : 9 + 3 * i]
                h, v = hv >> 4, hv & 15
                if not (1 <= h <= 4 and 1 <= v <= 4):
                    raise JpegParseError(f"bad sampling factors {h}x{v}", seg_start)
                frame.components.append({"id": cid, "h": h, "v": v, "tq": tq})
            hmax = max(c["h"] for c in frame.components)
            vmax = max(c["v"] for c in frame.components)
            mcux = -(-width // (8 * hmax))
            mcuy = -(-height // (8 * vmax))
            for c in frame.components:
                c["bw"] = mcux * c["h"]
                c["bh"] = mcuy * c["v"]
                comp_blocks.append(np.zeros((c["bh"], c["bw"], 64), dtype=np.int32))
            frame.hmax, frame.vmax, frame.mcux, frame.mcuy = hmax, vmax, mcux, mcuy
        elif marker == SOS:
            if frame is None:
                raise JpegParseError("SOS before SOF", seg_start)
            ns = payload[0] if payload else 0
            if not 1 <= ns <= 4 or len(payload) != 4 + 2 * ns:
                raise JpegParseError("malformed SOS segment", seg_start)
            ss, se, a = payload[1 + 2 * ns], payload[2 + 2 * ns], payload[3 + 2 * ns]
            if ss != 0 or se != 63 or a != 0:
                raise JpegUnsupportedError("spectral selection / successive approximation unsupported")
            ids = [c["id"] for c in frame.components]
            scan_comps = []
            scan_idx = []
            for i in range(ns):
                cid, tables = payload[1 + 2 * i], payload[2 + 2 * i]
                if cid not in ids:
                    raise JpegParseError(f"scan references unknown component {cid}", seg_start)
                k = ids.index(cid)
                c = frame.components[k]
                td, ta = tables >> 4, tables & 15
                if ("dc", td) not in huff or ("ac", ta) not in huff:
                    raise JpegParseError("scan references an undefined Huffman table", seg_start)
                scan_idx.append(k)
                if ns == 1:
                    bw = -(-(-(-frame.width * c["h"] // frame.hmax)) // 8)
                    bh = -(-(-(-frame.height * c["v"] // frame.vmax)) // 8)
                else:
                    bw, bh = c["bw"], c["bh"]
                scan_comps.append(DecodeComponent(c["h"], c["v"], c["bw"], c["bh"], huff[("dc", td)], huff[("ac", ta)]))
            if ns == 1:
                nx, ny = bw, bh
            else:
                nx, ny = frame.mcux, frame.mcuy
            end = _find_scan_end(buf, pos)
            decoded = decode_scan(buf, pos, end, scan_comps, nx, ny, restart)
            for k, arr in zip(scan_idx, decoded):
                comp_blocks[k] = arr
            pos = end
        # APPn, COM and anything else: skipped
    if not seen_eoi:
        raise JpegParseError("missing EOI marker", len(data))
    if frame is None:
        raise JpegParseError("no frame header", len(data))

    quant_tables: dict[int, QuantMatrix] = {}
    planes = []
    for i, (c, blocks) in enumerate(zip(frame.components, comp_blocks)):
        if c["tq"] not in qraw:
            raise JpegParseError(f"component {c['id']} uses undefined quantization table {c['tq']}")
        role = "luma" if i == 0 else "chroma"
        try:
            q = QuantMatrix(qraw[c["tq"]], role)
        except ValueError as exc:
            raise JpegUnsupportedError(f"quantization table {c['tq']}: {exc}") from exc
        quant_tables[i] = q
        planes.append(CoefficientPlane(blocks_to_plane(zigzag_unscan(blocks)), q, quantized=True))
    image = JpegImage(
        planes[0],
        planes[1] if len(planes) > 1 else None,
        planes[2] if len(planes) > 2 else None,
        width=frame.width,
        height=frame.height,
        sampling=tuple((c["h"], c["v"]) for c in frame.components),
    )
    return ParsedJpeg(image, quant_tables, markers, restart)


def read_jpeg(data: bytes) -> JpegImage:
    """Quantized coefficient planes of a baseline JPEG."""
    return parse_jpeg(data).image


def decode_jpeg_coefficients(data: bytes) -> tuple[JpegImage, list[QuantMatrix]]:
    """Dequantized coefficient planes plus the per-channel quantization tables."""
    img = read_jpeg(data)
    return img.dequantized(), [p.quant for p in img.planes]


def coefficients_to_samples(coeffs: np.ndarray) -> np.ndarray:
    """Inverse DCT, uncenter, round and clamp a dequantized plane.

    Samples are snapped to 1e-6 first so values that are exact halves in
    real arithmetic round the same way whatever float noise they carry.
    """
    return color.to_uint8(np.round(idct_plane(coeffs) + 128.0, 6))


def planes_to_pixels(img: JpegImage, planes: list[np.ndarray] | None = None) -> np.ndarray:
    """Reconstruct pixels from dequantized coefficient planes.

    ``planes`` overrides the coefficient arrays of ``img`` (same layout) and
    may be given at full luma resolution for chroma, in which case no
    upsampling is applied to them.
    """
    if planes is None:
        planes = [p.dequantized().values for p in img.planes]
    samples = [coefficients_to_samples(p) for p in planes]
    luma_h, luma_w = samples[0].shape
    if not img.is_color:
        return samples[0][: img.height, : img.width]
    hmax = max(h for h, _ in img.sampling)
    vmax = max(v for _, v in img.sampling)
    full = []
    for s, (h, v) in zip(samples, img.sampling):
        if s.shape != (luma_h, luma_w):
            s = color.upsample_chroma(s, vmax // v, hmax // h)
        full.append(s[:luma_h, :luma_w])
    rgb = np.stack(color.ycbcr_to_rgb(*full), axis=-1)
    return rgb[: img.height, : img.width]


def decode_jpeg_pixels(data: bytes) -> np.ndarray:
    """Decode to (H, W, 3) RGB or (H, W) grayscale uint8."""
    img = read_jpeg(data)
    hmax = max(h for h, _ in img.sampling)
    vmax = max(v for _, v in img.sampling)
    for h, v in img.sampling:
        if hmax % h or vmax % v:
            raise JpegUnsupportedError(f"non-integer chroma sampling ratio {hmax}/{h}, {vmax}/{v}")
    return planes_to_pixels(img)


def inspect_jpeg(data: bytes) -> dict:
    """Marker list, frame geometry and quantization tables."""
    parsed = parse_jpeg(data)
    img = parsed.image
    return {
        "width": img.width,
        "height": img.height,
        "components": len(img.planes),
        "subsampling": img.subsampling,
        "restart_interval": parsed.restart_interval,
        "markers": [(m.name, m.offset, m.length) for m in parsed.markers],
        "quant_tables": {i: q.entries.tolist() for i, q in parsed.quant_tables.items()},
    }
