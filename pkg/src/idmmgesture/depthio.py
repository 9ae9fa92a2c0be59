"""Depth sequence containers and on-disk formats.

Frames are held as ``uint16`` arrays of shape ``(height, width)``; a
:class:`DepthSequence` stacks them into ``(n_frames, height, width)``.

Formats handled here:

* ``.dseq`` - little-endian container, 24-byte header followed by raw
  row-major ``u16`` frames.
* binary PGM (``P5``) directories, one frame per file, ordered by filename.
* 8-bit RGB PNG for pseudo-colored images (written and read with ``zlib``).
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .validation import check_depth_frames, check_rgb_image

DSEQ_MAGIC = b"DSEQ"
DSEQ_VERSION = 1
_DSEQ_HEADER = struct.Struct("<4sHIIIHI")
DSEQ_HEADER_SIZE = _DSEQ_HEADER.size  # 24

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


class FormatError(ValueError):
    """Raised when a file does not match the expected on-disk layout."""


@dataclass(frozen=True, eq=False)
class DepthSequence:
    """An ordered stack of equally sized 16-bit depth frames."""

    frames: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        frames = check_depth_frames(self.frames)
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    def __len__(self):
        return self.frames.shape[0]

    def __eq__(self, other):
        if not isinstance(other, DepthSequence):
            return NotImplemented
        return (
            self.source_id == other.source_id
            and self.frames.shape == other.frames.shape
            and np.array_equal(self.frames, other.frames)
        )

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    def slice(self, start: int, end: int) -> "DepthSequence":
        """Frames ``start..end`` inclusive (0-based) as a new sequence."""
        if not 0 <= start <= end < len(self):
            raise IndexError(f"segment ({start}, {end}) outside [0, {len(self) - 1}]")
        return DepthSequence(self.frames[start : end + 1], self.source_id)


# --------------------------------------------------------------------------
# .dseq


def dumps_dseq(seq: DepthSequence) -> bytes:
    n, h, w = seq.frames.shape
    header = _DSEQ_HEADER.pack(DSEQ_MAGIC, DSEQ_VERSION, w, h, n, 16, 0)
    return header + seq.frames.astype("<u2", copy=False).tobytes(order="C")


def loads_dseq(buf: bytes, source_id: str = "") -> DepthSequence:
    if len(buf) < DSEQ_HEADER_SIZE:
        raise FormatError("truncated .dseq header")
    magic, version, w, h, n, bits, _reserved = _DSEQ_HEADER.unpack_from(buf)
    if magic != DSEQ_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {DSEQ_MAGIC!r}")
    if version != DSEQ_VERSION:
        raise FormatError(f"unsupported .dseq version {version}")
    if bits != 16:
        raise FormatError(f"unsupported bits_per_sample {bits}")
    if w == 0 or h == 0:
        raise FormatError("zero frame dimension")
    if n == 0:
        raise FormatError("sequence declares zero frames")
    payload = len(buf) - DSEQ_HEADER_SIZE
    need = n * w * h * 2
    if need > payload:
        raise FormatError(f"truncated payload: need {need} bytes, have {payload}")
    frames = np.frombuffer(buf, dtype="<u2", count=n * w * h, offset=DSEQ_HEADER_SIZE)
    return DepthSequence(frames.astype(np.uint16).reshape(n, h, w), source_id)


def save_dseq(seq: DepthSequence, path) -> None:
    Path(path).write_bytes(dumps_dseq(seq))


def load_dseq(path) -> DepthSequence:
    path = Path(path)
    return loads_dseq(path.read_bytes(), source_id=path.stem)


# --------------------------------------------------------------------------
# PGM


def _pgm_tokens(buf: bytes, count: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments.

    Returns the tokens and the offset of the single whitespace byte that
    terminates the last one.
    """
    tokens = []
    pos = 0
    n = len(buf)
    while len(tokens) < count:
        while pos < n and buf[pos : pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos : pos + 1] == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        tokens.append(buf[start:pos])
    return tokens, pos


def read_pgm(path) -> np.ndarray:
    """Read one binary (P5) PGM as a ``uint16`` array."""
    buf = Path(path).read_bytes()
    tokens, pos = _pgm_tokens(buf, 4)
    if tokens[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    try:
        w, h, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise FormatError(f"{path}: malformed PGM header") from exc
    if w <= 0 or h <= 0:
        raise FormatError(f"{path}: zero dimension")
    if not 0 < maxval <= 65535:
        raise FormatError(f"{path}: maxval {maxval} out of range")
    if pos >= len(buf) or not buf[pos : pos + 1].isspace():
        raise FormatError(f"{path}: malformed PGM header")
    pos += 1
    dtype = ">u2" if maxval > 255 else "u1"
    size = w * h * np.dtype(dtype).itemsize
    if len(buf) - pos < size:
        raise FormatError(f"{path}: truncated PGM raster")
    data = np.frombuffer(buf, dtype=dtype, count=w * h, offset=pos)
    return data.astype(np.uint16).reshape(h, w)


def write_pgm(frame: np.ndarray, path, maxval: int = 65535) -> None:
    frame = np.asarray(frame)
    h, w = frame.shape
    dtype = ">u2" if maxval > 255 else "u1"
    header = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + frame.astype(dtype).tobytes())


def load_pgm_dir(path) -> DepthSequence:
    path = Path(path)
    files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".pgm" and p.is_file())
    if not files:
        raise FormatError(f"{path}: no PGM files")
    frames = [read_pgm(p) for p in files]
    shape = frames[0].shape
    for p, f in zip(files, frames):
        if f.shape != shape:
            raise FormatError(
                f"{p.name}: dimensions {f.shape[::-1]} differ from {shape[::-1]}"
            )
    return DepthSequence(np.stack(frames), source_id=path.name)


def load_sequence(path) -> DepthSequence:
    """Load a ``.dseq`` file or a directory of PGM frames."""
    path = Path(path)
    if path.is_dir():
        return load_pgm_dir(path)
    return load_dseq(path)


# --------------------------------------------------------------------------
# PNG


def _png_chunk(tag: bytes, data: bytes) -> bytes:
    crc = zlib.crc32(tag + data) & 0xFFFFFFFF
    return struct.pack(">I", len(data)) + tag + data + struct.pack(">I", crc)


def encode_png(img: np.ndarray) -> bytes:
    img = check_rgb_image(img)
    h, w, _ = img.shape
    # filter type 0 on every scanline
    raw = np.zeros((h, 1 + 3 * w), dtype=np.uint8)
    raw[:, 1:] = img.reshape(h, 3 * w)
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    return (
        PNG_SIGNATURE
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"IDAT", zlib.compress(raw.tobytes(), 9))
        + _png_chunk(b"IEND", b"")
    )


def export_png(img: np.ndarray, path) -> None:
    """Write an RGB ``uint8`` image as an 8-bit, alpha-free PNG."""
    Path(path).write_bytes(encode_png(img))


def _paeth(a, b, c):
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    return b if pb <= pc else c


def decode_png(buf: bytes) -> np.ndarray:
    """Decode a non-interlaced 8-bit RGB PNG (any scanline filter)."""
    if not buf.startswith(PNG_SIGNATURE):
        raise FormatError("not a PNG file")
    pos = len(PNG_SIGNATURE)
    ihdr = None
    idat = []
    while pos + 8 <= len(buf):
        (length,) = struct.unpack_from(">I", buf, pos)
        tag = buf[pos + 4 : pos + 8]
        data = buf[pos + 8 : pos + 8 + length]
        if len(data) != length:
            raise FormatError("truncated PNG chunk")
        pos += 12 + length
        if tag == b"IHDR":
            ihdr = struct.unpack(">IIBBBBB", data)
        elif tag == b"IDAT":
            idat.append(data)
        elif tag == b"IEND":
            break
    if ihdr is None:
        raise FormatError("PNG without IHDR")
    w, h, depth, ctype, _comp, _filt, interlace = ihdr
    if depth != 8 or ctype != 2 or interlace != 0:
        raise FormatError("only 8-bit non-interlaced RGB PNG is supported")
    raw = zlib.decompress(b"".join(idat))
    stride = 3 * w
    if len(raw) != h * (stride + 1):
        raise FormatError("PNG raster size mismatch")
    out = np.zeros((h, stride), dtype=np.uint8)
    prev = np.zeros(stride, dtype=np.int64)
    for y in range(h):
        ftype = raw[y * (stride + 1)]
        line = np.frombuffer(raw, dtype=np.uint8, count=stride, offset=y * (stride + 1) + 1)
        line = line.astype(np.int64)
        if ftype == 0:
            cur = line
        elif ftype == 2:
            cur = (line + prev) & 0xFF
        elif ftype in (1, 3, 4):
            cur = np.zeros(stride, dtype=np.int64)
            for x in range(stride):
                a = cur[x - 3] if x >= 3 else 0
                if ftype == 1:
                    pred = a
                elif ftype == 3:
                    pred = (a + prev[x]) >> 1
                else:
                    pred = _paeth(a, prev[x], prev[x - 3] if x >= 3 else 0)
                cur[x] = (line[x] + pred) & 0xFF
        else:
            raise FormatError(f"bad PNG filter type {ftype}")
        out[y] = cur
        prev = cur
    return out.reshape(h, w, 3)


def read_png(path) -> np.ndarray:
    return decode_png(Path(path).read_bytes())
