"""Tables, colour conversion, padding, DCT, quantization and zigzag."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgac.jpeg import (
    QuantMatrix,
    dct_forward_block,
    dct_inverse_block,
    dct_plane,
    dequantize_block,
    idct_plane,
    pad_to_mcu,
    quality_to_tables,
    quantize_block,
    rgb_to_ycbcr,
    subsample_chroma,
    upsample_chroma,
    ycbcr_to_rgb,
    zigzag_scan,
    zigzag_unscan,
)
from qgac.jpeg.tables import CHROMA_BASE, LUMA_BASE

# Annex K base tables typed in from the standard, to check the embedded constants
ANNEX_K_LUMA = [
    16, 11, 10, 16, 24, 40, 51, 61, 12, 12, 14, 19, 26, 58, 60, 55,
    14, 13, 16, 24, 40, 57, 69, 56, 14, 17, 22, 29, 51, 87, 80, 62,
    18, 22, 37, 56, 68, 109, 103, 77, 24, 35, 55, 64, 81, 104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99,
]
ANNEX_K_CHROMA = [17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
                  24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99] + [99] * 32


def naive_dct(block):
    out = np.zeros((8, 8))
    for u in range(8):
        for v in range(8):
            cu = 1 / math.sqrt(2) if u == 0 else 1.0
            cv = 1 / math.sqrt(2) if v == 0 else 1.0
            acc = 0.0
            for x in range(8):
                for y in range(8):
                    acc += block[x, y] * math.cos((2 * x + 1) * u * math.pi / 16) * math.cos((2 * y + 1) * v * math.pi / 16)
            out[u, v] = 0.25 * cu * cv * acc
    return out


def walk_zigzag():
    """Simulate the zigzag walk cell by cell with bounces off the edges."""
    i = j = 0
    up = True
    order = [(0, 0)]
    while len(order) < 64:
        if up:
            if j == 7:
                i, up = i + 1, False
            elif i == 0:
                j, up = j + 1, False
            else:
                i, j = i - 1, j + 1
        else:
            if i == 7:
                j, up = j + 1, True
            elif j == 0:
                i, up = i + 1, True
            else:
                i, j = i + 1, j - 1
        order.append((i, j))
    return order


# --- quantization tables ------------------------------------------------------


def test_base_tables_match_annex_k():
    assert LUMA_BASE.reshape(-1).tolist() == ANNEX_K_LUMA
    assert CHROMA_BASE.reshape(-1).tolist() == ANNEX_K_CHROMA


def test_quality_50_is_base():
    luma, chroma = quality_to_tables(50)
    assert np.array_equal(luma.entries, LUMA_BASE)
    assert np.array_equal(chroma.entries, CHROMA_BASE)
    assert luma.channel_role == "luma" and chroma.channel_role == "chroma"


def test_quality_100_all_ones():
    for t in quality_to_tables(100):
        assert (t.entries == 1).all()


def test_quality_10_luma_dc():
    assert quality_to_tables(10)[0].entries[0, 0] == 80


@pytest.mark.parametrize("q", range(1, 101))
def test_quality_scaling_formula(q):
    scale = 5000 // q if q < 50 else 200 - 2 * q
    for base, table in zip((ANNEX_K_LUMA, ANNEX_K_CHROMA), quality_to_tables(q)):
        expect = [min(max((b * scale + 50) // 100, 1), 255) for b in base]
        assert table.entries.reshape(-1).tolist() == expect


@pytest.mark.parametrize("q", [0, 101, -5])
def test_quality_out_of_range(q):
    with pytest.raises(ValueError):
        quality_to_tables(q)


def test_quant_matrix_validation():
    with pytest.raises(ValueError):
        QuantMatrix(np.zeros((8, 8)))
    with pytest.raises(ValueError):
        QuantMatrix(np.full((8, 8), 256))
    with pytest.raises(ValueError):
        QuantMatrix(np.ones((4, 4)))


# --- colour -------------------------------------------------------------------


def _px(fn, a, b, c):
    out = fn(*(np.array([[v]], dtype=np.uint8) for v in (a, b, c)))
    return tuple(int(v[0, 0]) for v in out)


@pytest.mark.parametrize(
    "rgb, ycc",
    [((128, 128, 128), (128, 128, 128)), ((0, 0, 0), (0, 128, 128)), ((255, 0, 0), (76, 85, 255))],
)
def test_rgb_to_ycbcr_examples(rgb, ycc):
    assert _px(rgb_to_ycbcr, *rgb) == ycc


@pytest.mark.parametrize("ycc, rgb", [((128, 128, 128), (128, 128, 128)), ((255, 128, 128), (255, 255, 255))])
def test_ycbcr_to_rgb_examples(ycc, rgb):
    assert _px(ycbcr_to_rgb, *ycc) == rgb


def test_rgb_to_ycbcr_against_formula():
    rng = np.random.default_rng(5)
    r, g, b = (rng.integers(0, 256, 5000) for _ in range(3))
    y, cb, cr = (p[0] for p in rgb_to_ycbcr(*(a.astype(np.uint8)[None] for a in (r, g, b))))
    for k in range(0, 5000, 97):
        rr, gg, bb = float(r[k]), float(g[k]), float(b[k])
        exact = (
            0.299 * rr + 0.587 * gg + 0.114 * bb,
            128 - 0.168736 * rr - 0.331264 * gg + 0.5 * bb,
            128 + 0.5 * rr - 0.418688 * gg - 0.081312 * bb,
        )
        for got, want in zip((y[k], cb[k], cr[k]), exact):
            assert int(got) == min(255, max(0, math.floor(want + 0.5)))


def test_color_round_trip_strided_sweep():
    v = np.arange(0, 256, 7, dtype=np.uint8)
    r, g, b = (a.reshape(v.size, -1) for a in np.meshgrid(v, v, v, indexing="ij"))
    back = ycbcr_to_rgb(*rgb_to_ycbcr(r, g, b))
    for orig, got in zip((r, g, b), back):
        assert np.abs(orig.astype(int) - got.astype(int)).max() <= 1


def test_color_mismatched_sizes():
    with pytest.raises(ValueError):
        rgb_to_ycbcr(np.zeros((1, 3), np.uint8), np.zeros((1, 4), np.uint8), np.zeros((1, 3), np.uint8))
    with pytest.raises(ValueError):
        ycbcr_to_rgb(np.zeros((2, 2), np.uint8), np.zeros((2, 2), np.uint8), np.zeros((2, 3), np.uint8))


# --- padding and chroma resampling -------------------------------------------


def test_pad_examples(rng):
    p = rng.integers(0, 256, (16, 16), dtype=np.uint8)
    assert np.array_equal(pad_to_mcu(p, 16), p)
    p = rng.integers(0, 256, (16, 17), dtype=np.uint8)
    out = pad_to_mcu(p, 16)
    assert out.shape == (16, 32)
    assert np.array_equal(out[:, :17], p)
    assert (out[:, 17:] == p[:, 16:17]).all()
    assert np.array_equal(pad_to_mcu(np.array([[9]], np.uint8), 8), np.full((8, 8), 9))


def test_pad_errors():
    with pytest.raises(ValueError):
        pad_to_mcu(np.zeros((0, 4), np.uint8), 8)
    with pytest.raises(ValueError):
        pad_to_mcu(np.zeros((4, 4), np.uint8), 12)


def test_subsample_examples():
    assert subsample_chroma(np.array([[0, 0], [0, 4]], np.uint8))[0, 0] == 1
    assert subsample_chroma(np.array([[1, 1], [2, 2]], np.uint8))[0, 0] == 2
    assert (subsample_chroma(np.full((6, 8), 77, np.uint8)) == 77).all()
    with pytest.raises(ValueError):
        subsample_chroma(np.zeros((3, 4), np.uint8))


def test_subsample_rounding_oracle(rng):
    p = rng.integers(0, 256, (10, 12), dtype=np.uint8)
    got = subsample_chroma(p)
    for i in range(5):
        for j in range(6):
            m = float(p[2 * i : 2 * i + 2, 2 * j : 2 * j + 2].astype(int).mean())
            assert got[i, j] == math.floor(m + 0.5)


def test_upsample_examples():
    assert np.array_equal(upsample_chroma(np.array([[5]], np.uint8)), np.full((2, 2), 5))
    c = np.full((4, 6), 31, np.uint8)
    assert np.array_equal(upsample_chroma(subsample_chroma(c)), c)
    with pytest.raises(ValueError):
        upsample_chroma(np.zeros((0, 0), np.uint8))


# --- DCT ----------------------------------------------------------------------


def test_dct_matches_naive_formula(rng):
    for _ in range(5):
        b = rng.uniform(-128, 127, (8, 8))
        assert np.allclose(dct_forward_block(b), naive_dct(b), atol=1e-10)


def test_dct_examples():
    assert (dct_forward_block(np.zeros((8, 8))) == 0).all()
    d = dct_forward_block(np.full((8, 8), 3.0))
    assert d[0, 0] == pytest.approx(24.0, abs=1e-12)
    d[0, 0] = 0
    assert np.abs(d).max() < 1e-12
    assert (dct_inverse_block(np.zeros((8, 8))) == 0).all()
    c = np.zeros((8, 8))
    c[0, 0] = 8
    assert np.allclose(dct_inverse_block(c), 1.0, atol=1e-12)


def test_dct_parseval_and_inverse(rng):
    blocks = rng.uniform(-128, 127, (100, 8, 8))
    for b in blocks:
        d = dct_forward_block(b)
        assert abs((b**2).sum() - (d**2).sum()) < 1e-9 * max(1.0, (b**2).sum())
        assert np.abs(dct_inverse_block(d) - b).max() < 1e-9


def test_plane_transforms_blockwise(rng):
    plane = rng.uniform(-128, 127, (16, 24))
    d = dct_plane(plane)
    for r in range(2):
        for c in range(3):
            sl = np.s_[8 * r : 8 * r + 8, 8 * c : 8 * c + 8]
            assert np.allclose(d[sl], dct_forward_block(plane[sl]), atol=1e-12)
    assert np.abs(idct_plane(d) - plane).max() < 1e-9
    with pytest.raises(ValueError):
        dct_plane(np.zeros((8, 9)))


# --- quantization -------------------------------------------------------------


def test_quantize_examples():
    q16 = QuantMatrix(np.full((8, 8), 16))
    b = np.zeros((8, 8))
    b[0, 0], b[0, 1] = 17, -17
    out = quantize_block(b, q16)
    assert out[0, 0] == 1 and out[0, 1] == -1
    ones = QuantMatrix(np.ones((8, 8)))
    ints = np.arange(-32, 32, dtype=float).reshape(8, 8)
    assert np.array_equal(quantize_block(ints, ones), ints)


def test_dequantize_examples():
    q16 = QuantMatrix(np.full((8, 8), 16))
    one = np.zeros((8, 8), np.int32)
    one[0, 0] = 1
    assert dequantize_block(one, q16)[0, 0] == 16
    assert (dequantize_block(np.zeros((8, 8), np.int32), q16) == 0).all()
    with pytest.raises(TypeError):
        dequantize_block(np.zeros((8, 8)), q16)


def test_quantize_idempotent(rng):
    q = quality_to_tables(25)[0]
    d = rng.uniform(-1000, 1000, (8, 8))
    once = dequantize_block(quantize_block(d, q), q)
    twice = dequantize_block(quantize_block(once, q), q)
    assert np.array_equal(once, twice)


@settings(max_examples=200, deadline=None)
@given(st.floats(-2000, 2000, allow_nan=False), st.integers(1, 255))
def test_quantization_error_bound(d, div):
    q = QuantMatrix(np.full((8, 8), div))
    block = np.full((8, 8), d)
    back = dequantize_block(quantize_block(block, q), q)
    assert (np.abs(back - block) < div).all()


def test_unit_divisors_injective_on_integers(rng):
    ones = QuantMatrix(np.ones((8, 8)))
    a = rng.integers(-1024, 1024, (50, 8, 8)).astype(float)
    keys = {quantize_block(b, ones).tobytes() for b in a}
    assert len(keys) == len({b.tobytes() for b in a})


# --- zigzag -------------------------------------------------------------------


def test_zigzag_matches_walk():
    block = np.arange(64).reshape(8, 8)
    assert zigzag_scan(block).tolist() == [i * 8 + j for i, j in walk_zigzag()]


def test_zigzag_examples(rng):
    block = rng.integers(-50, 50, (8, 8))
    v = zigzag_scan(block)
    assert v[0] == block[0, 0]
    assert sorted(zigzag_scan(np.arange(64).reshape(8, 8)).tolist()) == list(range(64))
    assert np.array_equal(zigzag_unscan(v), block)
    e = np.zeros(64)
    e[0] = 1
    u = zigzag_unscan(e)
    assert u[0, 0] == 1 and u.sum() == 1
    w = rng.integers(-9, 9, 64)
    assert np.array_equal(zigzag_unscan(zigzag_scan(zigzag_unscan(w))), zigzag_unscan(w))
    with pytest.raises(ValueError):
        zigzag_unscan(np.zeros(63))
    with pytest.raises(ValueError):
        zigzag_scan(np.zeros((8, 7)))
