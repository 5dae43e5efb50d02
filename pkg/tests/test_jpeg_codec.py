"""Whole-file encoding and decoding, checked against libjpeg."""

import io

import jpeglib
import numpy as np
import pytest
from PIL import Image

from corpus import photograph, photographs
from reference import coefficients_match, our_component_samples, reference_coefficients, reference_samples
from qgac.jpeg import (
    JpegParseError,
    JpegUnsupportedError,
    decode_jpeg_coefficients,
    decode_jpeg_pixels,
    encode_jpeg,
    encode_planes,
    inspect_jpeg,
    parse_jpeg,
    quality_to_tables,
    read_jpeg,
    write_jpeg,
)
from qgac.jpeg.color import pad_to_mcu, rgb_image_to_ycbcr, rgb_to_ycbcr, round_half_away, subsample_chroma
from qgac.jpeg.dct import dct_plane, quantize_plane
from qgac.metrics import psnr


def pillow_jpeg(image, **options):
    buf = io.BytesIO()
    Image.fromarray(image).save(buf, format="JPEG", **options)
    return buf.getvalue()


def test_markers_and_structure():
    data = encode_jpeg(photograph("coffee_odd"), 75)
    assert data[:2] == b"\xff\xd8" and data[-2:] == b"\xff\xd9"
    info = inspect_jpeg(data)
    names = [m[0] for m in info["markers"]]
    assert names == ["SOI", "APP0", "DQT", "SOF0", "DHT", "SOS", "EOI"]
    assert (info["width"], info["height"]) == (143, 97)
    assert info["subsampling"] == "4:2:0"
    assert info["quant_tables"][0] == quality_to_tables(75)[0].entries.tolist()
    assert b"JFIF\x00\x01\x01" in data[:20]


@pytest.mark.parametrize("q", [10, 50, 95])
def test_quant_tables_survive(q):
    _, quants = decode_jpeg_coefficients(encode_jpeg(photograph("astronaut_odd"), q))
    luma, chroma = quality_to_tables(q)
    assert quants[0] == luma and quants[1] == chroma and quants[2] == chroma


def test_coefficients_equal_pipeline():
    img = photograph("coffee_odd")
    q = 30
    data = encode_jpeg(img, q)
    parsed = read_jpeg(data)
    luma, chroma = quality_to_tables(q)
    y, cb, cr = rgb_to_ycbcr(img[..., 0], img[..., 1], img[..., 2])
    expect = []
    for plane, table in ((y, luma), (cb, chroma), (cr, chroma)):
        p = pad_to_mcu(plane, 16)
        if table is chroma:
            p = subsample_chroma(p)
        expect.append(quantize_plane(round_half_away(dct_plane(p.astype(float) - 128)), table))
    for got, want in zip(parsed.planes, expect):
        assert np.array_equal(got.values, want)
    deq, _ = decode_jpeg_coefficients(data)
    for got, want, table in zip(deq.planes, expect, (luma, chroma, chroma)):
        assert not got.quantized
        assert np.array_equal(got.values, want * np.tile(table.entries, (want.shape[0] // 8, want.shape[1] // 8)))


def test_encode_planes_matches_file():
    img = photograph("cat_odd")
    planes = encode_planes(img, 40, "4:4:4")
    back = read_jpeg(write_jpeg(planes))
    assert back.subsampling == "4:4:4"
    for a, b in zip(planes.planes, back.planes):
        assert np.array_equal(a.values, b.values)


def test_output_dims_match_frame():
    for shape in ((1, 1, 3), (17, 33, 3), (9, 40)):
        img = np.random.default_rng(0).integers(0, 256, shape, dtype=np.uint8)
        out = decode_jpeg_pixels(encode_jpeg(img, 80))
        assert out.shape == shape


def test_gray_constant_exact():
    img = np.full((40, 24, 3), 128, dtype=np.uint8)
    assert np.array_equal(decode_jpeg_pixels(encode_jpeg(img, 50)), img)
    # DC 8 * (100 - 128) = -224 is a multiple of the q=50 DC divisor 16
    g = np.full((19, 21), 100, dtype=np.uint8)
    assert np.array_equal(decode_jpeg_pixels(encode_jpeg(g, 50)), g)


@pytest.mark.parametrize("name", ["camera", "brick", "grass", "gravel", "moon", "coins", "clock", "cell"])
def test_quality_100_444_psnr_gray(name):
    img = photograph(name)
    out = decode_jpeg_pixels(encode_jpeg(img, 100, "4:4:4"))
    assert psnr(img, out) >= 55.0


@pytest.mark.parametrize("name", ["astronaut", "chelsea", "coffee", "rocket", "motorcycle_left"])
def test_quality_100_444_psnr_color_components(name):
    # the colour transform rounds to 8 bits on both sides, so the DCT-only
    # bound is checked on the stored YCbCr samples
    img = photograph(name)
    data = encode_jpeg(img, 100, "4:4:4")
    assert psnr(rgb_image_to_ycbcr(img), our_component_samples(data)) >= 55.0


def test_unit_divisors_round_trip_through_file():
    img = photograph("chelsea")
    planes = encode_planes(img, 100, "4:4:4")
    back = read_jpeg(write_jpeg(planes))
    assert all(np.array_equal(a.values, b.values) for a, b in zip(planes.planes, back.planes))


def test_dims_too_large():
    with pytest.raises(ValueError):
        encode_planes(np.zeros((1, 70000), dtype=np.uint8))


def test_bad_inputs():
    with pytest.raises(ValueError):
        encode_jpeg(np.zeros((8, 8, 3), dtype=np.float32))
    with pytest.raises(ValueError):
        encode_jpeg(np.zeros((8, 8, 3), dtype=np.uint8), subsampling="4:1:1")


# --- error paths --------------------------------------------------------------


def test_progressive_unsupported():
    data = pillow_jpeg(photograph("coffee_odd"), quality=50, progressive=True)
    with pytest.raises(JpegUnsupportedError, match="progressive unsupported"):
        decode_jpeg_coefficients(data)


def test_missing_soi():
    with pytest.raises(JpegParseError):
        read_jpeg(b"\x00\x00\xff\xd9")


def test_truncated_file():
    data = encode_jpeg(photograph("coffee_odd"), 50)
    for cut in (3, 30, len(data) // 2, len(data) - 1):
        with pytest.raises(JpegParseError):
            read_jpeg(data[:cut])


def test_twelve_bit_unsupported():
    data = bytearray(encode_jpeg(np.zeros((8, 8), np.uint8), 50))
    sof = data.index(b"\xff\xc0")
    data[sof + 4] = 12
    with pytest.raises(JpegUnsupportedError, match="12-bit"):
        read_jpeg(bytes(data))


# --- reference decoder -----------------------------------------------------------


@pytest.mark.parametrize("q", [10, 50, 90])
@pytest.mark.parametrize("name", ["astronaut_odd", "camera", "retina"])
def test_libjpeg_reads_our_coefficients(name, q):
    assert coefficients_match(encode_jpeg(photograph(name), q))


@pytest.mark.parametrize("name", ["astronaut_odd", "coins", "hubble"])
def test_component_samples_within_one(name):
    img = photograph(name)
    data = encode_jpeg(img, 20)
    space = jpeglib.JCS_YCbCr if img.ndim == 3 else jpeglib.JCS_GRAYSCALE
    ours = our_component_samples(data)
    ref = reference_samples(data, space).reshape(ours.shape)
    assert np.abs(ours.astype(int) - ref).max() <= 1


def test_rgb_matches_where_samples_agree():
    img = photograph("coffee_odd")
    data = encode_jpeg(img, 50)
    same = (our_component_samples(data).astype(int) == reference_samples(data, jpeglib.JCS_YCbCr)).all(axis=-1)
    ours = decode_jpeg_pixels(data).astype(int)
    ref = reference_samples(data, jpeglib.JCS_RGB).astype(int)
    assert same.mean() > 0.5
    assert np.abs(ours - ref)[same].max() <= 1


@pytest.mark.parametrize("subsampling", [0, 1, 2])
def test_we_read_libjpeg_files(subsampling):
    img = photograph("astronaut_odd")
    data = pillow_jpeg(img, quality=60, subsampling=subsampling)
    ours = [p.values for p in read_jpeg(data).planes]
    for a, b in zip(ours, reference_coefficients(data)):
        assert np.array_equal(a[: b.shape[0], : b.shape[1]], b)
    assert decode_jpeg_pixels(data).shape == img.shape


def test_restart_markers_and_optimized_tables():
    img = photograph("coffee_odd")
    plain = pillow_jpeg(img, quality=45)
    restarted = pillow_jpeg(img, quality=45, restart_marker_blocks=3, optimize=True)
    assert parse_jpeg(restarted).restart_interval > 0
    a, b = read_jpeg(plain), read_jpeg(restarted)
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a.planes, b.planes))
    assert np.array_equal(decode_jpeg_pixels(plain), decode_jpeg_pixels(restarted))


def test_corpus_is_twenty_photographs():
    imgs = photographs()
    assert len(imgs) == 20
    assert len({n for n, _ in imgs}) == 20
