"""Huffman tables and scan-level entropy coding."""

import heapq

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgac.jpeg import (
    HuffmanTable,
    JpegEncodeError,
    JpegParseError,
    QuantMatrix,
    entropy_decode_scan,
    entropy_encode_scan,
    optimal_table,
    standard_tables,
)
from qgac.jpeg.codec import CoefficientPlane, JpegImage
from qgac.jpeg.entropy import magnitude_bits, pack_bits, size_category

ONES = QuantMatrix(np.ones((8, 8)))


def gray_image(values):
    values = np.asarray(values, dtype=np.int32)
    return JpegImage(CoefficientPlane(values, ONES), width=values.shape[1], height=values.shape[0])


def random_image(rng, mcu_rows, mcu_cols, sampling, density=0.2, amp=1023):
    """Sparse random quantized planes with a valid layout for ``sampling``."""
    planes = []
    for h, v in sampling:
        shape = (8 * v * mcu_rows, 8 * h * mcu_cols)
        vals = rng.integers(-amp, amp + 1, shape) * (rng.random(shape) < density)
        planes.append(CoefficientPlane(vals.astype(np.int32), ONES))
    hmax = max(h for h, _ in sampling)
    vmax = max(v for _, v in sampling)
    return JpegImage(
        *(planes + [None] * (3 - len(planes))),
        width=8 * hmax * mcu_cols,
        height=8 * vmax * mcu_rows,
        sampling=tuple(sampling),
    )


def round_trip(img):
    data = entropy_encode_scan(img)
    back = entropy_decode_scan(data, None, img.width, img.height, img.sampling)
    return all(np.array_equal(a.values, b.values) for a, b in zip(img.planes, back.planes))


def all_prefix_free(codes):
    words = [format(c, f"0{n}b") for c, n in codes.values()]
    for a in words:
        for b in words:
            if a is not b and b.startswith(a):
                return False
    return True


def huffman_cost(freqs):
    """Optimal unrestricted prefix-code cost by the textbook heap merge."""
    heap = [f for f in freqs if f > 0]
    if len(heap) == 1:
        return heap[0]
    heapq.heapify(heap)
    total = 0
    while len(heap) > 1:
        a, b = heapq.heappop(heap), heapq.heappop(heap)
        total += a + b
        heapq.heappush(heap, a + b)
    return total


# --- Huffman tables -----------------------------------------------------------


@pytest.mark.parametrize("key", [("dc", 0), ("ac", 0), ("dc", 1), ("ac", 1)])
def test_standard_tables_prefix_free(key):
    t = standard_tables()[key]
    codes = t.codes
    assert all_prefix_free(codes)
    assert len(codes) == sum(t.bits)
    # canonical: codes increase with (length, position)
    ordered = [codes[s] for s in t.values]
    assert [n for _, n in ordered] == sorted(n for _, n in ordered)
    assert all(c != (1 << n) - 1 for c, n in ordered)


def test_standard_dc_luma_codes():
    codes = standard_tables()[("dc", 0)].codes
    assert codes[0] == (0b00, 2)
    assert codes[3] == (0b100, 3)
    assert codes[11] == (0b111111110, 9)


def test_table_validation():
    with pytest.raises(ValueError):
        HuffmanTable((1,) * 15, (0,) * 15)
    with pytest.raises(ValueError):
        HuffmanTable((2,) + (0,) * 15, (0, 1))  # "0", "1": second is all ones
    with pytest.raises(ValueError):
        HuffmanTable((3,) + (0,) * 15, (0, 1, 2))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 5000), min_size=256, max_size=256).filter(lambda f: sum(f) > 0))
def test_optimal_table_properties(freqs):
    t = optimal_table(freqs, "ac", 1)
    codes = t.codes
    used = {s for s, f in enumerate(freqs) if f > 0}
    assert used <= set(codes)
    assert max(n for _, n in codes.values()) <= 16
    assert all_prefix_free(codes)
    cost = sum(freqs[s] * codes[s][1] for s in used)
    # never better than unrestricted optimum, never worse than optimum with the reserved symbol
    assert cost >= huffman_cost([freqs[s] for s in used])
    if max(freqs) < 50 * min(f for f in freqs if f > 0):
        assert cost <= huffman_cost([freqs[s] for s in used] + [1])


def test_optimal_table_needs_symbols():
    with pytest.raises(JpegEncodeError):
        optimal_table([0] * 256)


# --- bit-level helpers ---------------------------------------------------------


def test_size_category_and_magnitude():
    vals = np.array([0, 1, -1, 2, -3, 5, 1023, -1024, 2047])
    assert size_category(vals).tolist() == [0, 1, 1, 2, 2, 3, 10, 11, 11]
    assert magnitude_bits(np.array([5, -5]), np.array([3, 3])).tolist() == [5, 2]


def test_pack_bits_pads_with_ones_and_stuffs():
    assert pack_bits(np.array([0b101]), np.array([3])) == bytes([0b10111111])
    assert pack_bits(np.array([0xFF]), np.array([8])) == b"\xff\x00"
    assert pack_bits(np.array([], dtype=np.int64), np.array([], dtype=np.int64)) == b""


# --- scan coding ---------------------------------------------------------------


def test_all_zero_block_trace():
    # DC category 0 is "00", EOB is "1010", then two padding ones
    assert entropy_encode_scan(gray_image(np.zeros((8, 8)))) == bytes([0b00101011])


def test_dc_five_trace():
    # "100" (category 3) + "101" (value 5) + "1010" (EOB) + six padding ones
    block = np.zeros((8, 8))
    block[0, 0] = 5
    assert entropy_encode_scan(gray_image(block)) == bytes([0b10010110, 0b10111111])


def test_dc_prediction_codes_differences():
    plane = np.zeros((8, 16))
    plane[0, 0] = plane[0, 8] = 5
    # second block repeats DC 5, so its difference is 0 ("00") then EOB
    data = entropy_encode_scan(gray_image(plane))
    assert data == bytes([0b10010110, 0b10001010])


def test_stuffed_byte_decodes_as_data():
    block = np.zeros((8, 8))
    block[0, 0] = 2047
    data = entropy_encode_scan(gray_image(block))
    assert data == bytes([0xFF, 0x00, 0x7F, 0xFA])
    back = entropy_decode_scan(data, None, 8, 8)
    assert back.y.values[0, 0] == 2047


def test_zrl_run():
    block = np.zeros(64, dtype=np.int32)
    block[40] = -7  # 39 zeros in between: two ZRL then run 7
    from qgac.jpeg import zigzag_unscan

    img = gray_image(zigzag_unscan(block))
    assert round_trip(img)


def test_truncated_stream_reports_offset():
    rng = np.random.default_rng(3)
    img = random_image(rng, 4, 4, ((1, 1),), density=0.6, amp=200)
    data = entropy_encode_scan(img)
    with pytest.raises(JpegParseError) as info:
        entropy_decode_scan(data[: len(data) // 2], None, img.width, img.height)
    assert info.value.offset is not None


def test_invalid_code_is_parse_error():
    # "1111 1111 1" is not a luma DC code; stuffing keeps 0xFF a data byte
    with pytest.raises(JpegParseError):
        entropy_decode_scan(b"\xff\x00\xff\x00", None, 8, 8)


def test_run_past_end_is_parse_error():
    # DC "00", then AC 0xF0 (ZRL, "11111111001") four times reaches index 65
    bits = "00" + "11111111001" * 4
    bits += "1" * (-len(bits) % 8)
    raw = bytes(int(bits[i : i + 8], 2) for i in range(0, len(bits), 8)).replace(b"\xff", b"\xff\x00")
    with pytest.raises(JpegParseError):
        entropy_decode_scan(raw, None, 8, 8)


def test_coefficient_range_errors():
    block = np.zeros((8, 8))
    block[0, 1] = 1024
    with pytest.raises(JpegEncodeError):
        entropy_encode_scan(gray_image(block))


def test_missing_symbol_is_encode_error():
    tables = dict(standard_tables())
    tables[("dc", 0)] = HuffmanTable((1,) + (0,) * 15, (0,), "dc", 0)
    block = np.zeros((8, 8))
    block[0, 0] = 3
    with pytest.raises(JpegEncodeError, match="missing"):
        entropy_encode_scan(gray_image(block), tables)


@pytest.mark.parametrize("sampling", [((1, 1),), ((1, 1),) * 3, ((2, 2), (1, 1), (1, 1)), ((2, 1), (1, 1), (1, 1))])
def test_round_trip_layouts(sampling, rng):
    for rows, cols in ((1, 1), (2, 3), (5, 2)):
        assert round_trip(random_image(rng, rows, cols, sampling))


def test_round_trip_extremes():
    assert round_trip(gray_image(np.zeros((8, 8))))
    plane = np.full((16, 16), 1023, dtype=np.int32)
    plane[::8, ::8] = [[-1024, 1023], [1023, -1024]]
    assert round_trip(gray_image(plane))
    assert round_trip(gray_image(-plane))


@settings(max_examples=150, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.integers(1, 4),
    st.integers(1, 4),
    st.sampled_from([((1, 1),), ((1, 1),) * 3, ((2, 2), (1, 1), (1, 1))]),
    st.sampled_from([0.0, 0.05, 0.5, 1.0]),
    st.sampled_from([1, 15, 1023]),
)
def test_round_trip_property(seed, rows, cols, sampling, density, amp):
    rng = np.random.default_rng(seed)
    assert round_trip(random_image(rng, rows, cols, sampling, density, amp))
