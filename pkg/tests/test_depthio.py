import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from idmmgesture.depthio import (
    DSEQ_HEADER_SIZE,
    DepthSequence,
    FormatError,
    decode_png,
    dumps_dseq,
    export_png,
    load_dseq,
    load_pgm_dir,
    load_sequence,
    loads_dseq,
    read_png,
    save_dseq,
    write_pgm,
)


def header(w, h, n, magic=b"DSEQ"):
    return struct.pack("<4sHIIIHI", magic, 1, w, h, n, 16, 0)


def test_header_is_24_bytes():
    assert DSEQ_HEADER_SIZE == 24


def test_load_zero_payload(tmp_path):
    p = tmp_path / "z.dseq"
    p.write_bytes(header(2, 2, 1) + bytes(8))
    seq = load_dseq(p)
    assert seq.frames.shape == (1, 2, 2)
    assert not seq.frames.any()
    assert seq.source_id == "z"


def test_single_zero_frame_size(tmp_path):
    p = tmp_path / "a.dseq"
    save_dseq(DepthSequence(np.zeros((1, 2, 2), np.uint16)), p)
    assert p.stat().st_size == 24 + 8


def test_little_endian_samples():
    buf = header(1, 1, 1) + b"\x34\x12"
    assert loads_dseq(buf).frames[0, 0, 0] == 0x1234


def test_byte_identical_resave(tmp_path, rng):
    p = tmp_path / "r.dseq"
    p.write_bytes(header(3, 5, 4) + rng.integers(0, 256, 3 * 5 * 4 * 2, dtype=np.uint8).tobytes())
    q = tmp_path / "r2.dseq"
    save_dseq(load_dseq(p), q)
    assert q.read_bytes() == p.read_bytes()


@pytest.mark.parametrize(
    "buf, msg",
    [
        (header(2, 2, 3) + bytes(16), "truncated payload"),
        (header(2, 2, 1, magic=b"DSEX") + bytes(8), "bad magic"),
        (header(0, 2, 1), "zero frame dimension"),
        (b"DSEQ", "truncated"),
    ],
)
def test_load_errors(buf, msg):
    with pytest.raises(FormatError, match=msg):
        loads_dseq(buf)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_dseq(tmp_path / "nope.dseq")


def test_empty_sequence_rejected():
    with pytest.raises(ValueError):
        DepthSequence(np.zeros((0, 2, 2), np.uint16))
    with pytest.raises(ValueError):
        DepthSequence([])


def test_mixed_frame_shapes_rejected():
    with pytest.raises(ValueError):
        DepthSequence([np.zeros((2, 2)), np.zeros((3, 2))])


@settings(max_examples=50, deadline=None)
@given(
    n=st.integers(1, 4), h=st.integers(1, 6), w=st.integers(1, 6), seed=st.integers(0, 2**32 - 1)
)
def test_dseq_roundtrip(tmp_path_factory, n, h, w, seed):
    frames = np.random.default_rng(seed).integers(0, 65536, (n, h, w), dtype=np.uint16)
    seq = DepthSequence(frames, "x")
    assert loads_dseq(dumps_dseq(seq), "x") == seq


def test_pgm_dir_order_and_16bit(tmp_path, rng):
    a = rng.integers(0, 65536, (4, 5), dtype=np.uint16)
    b = rng.integers(0, 65536, (4, 5), dtype=np.uint16)
    write_pgm(b, tmp_path / "f1.pgm")
    write_pgm(a, tmp_path / "f0.pgm")
    seq = load_pgm_dir(tmp_path)
    assert len(seq) == 2
    np.testing.assert_array_equal(seq.frames[0], a)
    np.testing.assert_array_equal(seq.frames[1], b)
    # raster is big-endian on disk
    raw = (tmp_path / "f0.pgm").read_bytes()
    assert raw[-2:] == struct.pack(">H", int(a[-1, -1]))
    assert load_sequence(tmp_path) == seq


def test_pgm_8bit_widens_unchanged(tmp_path, rng):
    img = rng.integers(0, 256, (3, 7), dtype=np.uint8)
    raw = b"P5\n# a comment\n7 3\n255\n" + img.tobytes()
    (tmp_path / "a.pgm").write_bytes(raw)
    seq = load_pgm_dir(tmp_path)
    # byte-level reader: each sample is one byte after the header
    body = raw[-21:]
    for y in range(3):
        for x in range(7):
            assert seq.frames[0, y, x] == body[y * 7 + x]
    assert seq.frames.dtype == np.uint16


def test_pgm_dimension_mismatch(tmp_path):
    write_pgm(np.zeros((4, 4)), tmp_path / "a.pgm")
    write_pgm(np.zeros((8, 8)), tmp_path / "b.pgm")
    with pytest.raises(FormatError, match="dimensions"):
        load_pgm_dir(tmp_path)


def test_pgm_errors(tmp_path):
    with pytest.raises(FormatError, match="no PGM"):
        load_pgm_dir(tmp_path)
    (tmp_path / "bad.pgm").write_bytes(b"P2\n2 2\n255\n0 0 0 0")
    with pytest.raises(FormatError, match="binary PGM"):
        load_pgm_dir(tmp_path)


def test_png_single_pixel_pillow(tmp_path):
    p = tmp_path / "px.png"
    export_png(np.array([[[255, 16, 16]]], np.uint8), p)
    with Image.open(p) as im:
        assert im.mode == "RGB"
        assert im.getpixel((0, 0)) == (255, 16, 16)


def test_png_black(tmp_path):
    p = tmp_path / "k.png"
    export_png(np.zeros((3, 4, 3), np.uint8), p)
    with Image.open(p) as im:
        assert not np.asarray(im).any()


@settings(max_examples=30, deadline=None)
@given(h=st.integers(1, 9), w=st.integers(1, 9), seed=st.integers(0, 2**32 - 1))
def test_png_roundtrip(tmp_path_factory, h, w, seed):
    img = np.random.default_rng(seed).integers(0, 256, (h, w, 3), dtype=np.uint8)
    p = tmp_path_factory.mktemp("png") / "i.png"
    export_png(img, p)
    np.testing.assert_array_equal(read_png(p), img)
    with Image.open(p) as im:
        np.testing.assert_array_equal(np.asarray(im), img)


def test_png_reader_handles_pillow_filters(tmp_path, rng):
    # Pillow picks adaptive scanline filters, exercising all decode paths
    img = rng.integers(0, 256, (16, 16, 3), dtype=np.uint8)
    img[:, :8] = np.arange(8)[None, :, None] * 20
    p = tmp_path / "pil.png"
    Image.fromarray(img, "RGB").save(p, optimize=True)
    np.testing.assert_array_equal(decode_png(p.read_bytes()), img)
