"""Minimal PGM (P2 ASCII / P5 binary) reader and writer."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Union

import numpy as np

PathLike = Union[str, os.PathLike]


class PGMError(ValueError):
    pass


def _tokens(data: bytes, count: int, pos: int) -> tuple[list[bytes], int]:
    out: list[bytes] = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise PGMError("truncated PGM header")
        out.append(data[start:pos])
    return out, pos


def parse_pgm(data: bytes) -> tuple[np.ndarray, int]:
    """Return (pixels with shape (height, width), maxval)."""
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PGMError(f"not a grayscale PGM (magic {magic!r})")
    (w, h, mv), pos = _tokens(data, 3, 2)
    try:
        width, height, maxval = int(w), int(h), int(mv)
    except ValueError as exc:
        raise PGMError("malformed PGM header") from exc
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise PGMError(f"invalid PGM header: {width}x{height}, maxval {maxval}")
    count = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte ends the header
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = data[pos : pos + count * dtype.itemsize]
        if len(raw) < count * dtype.itemsize:
            raise PGMError("truncated PGM raster")
        pixels = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    else:
        values, _ = _tokens(data, count, pos)
        pixels = np.array([int(v) for v in values], dtype=np.int64)
    if pixels.max(initial=0) > maxval:
        raise PGMError("pixel value exceeds maxval")
    return pixels.reshape(height, width), maxval


def read_pgm(path: PathLike) -> tuple[np.ndarray, int]:
    return parse_pgm(Path(path).read_bytes())


def format_pgm(pixels: np.ndarray, maxval: int, binary: bool = True) -> bytes:
    px = np.asarray(pixels, dtype=np.int64)
    if px.ndim != 2:
        raise PGMError("pixels must be 2-D")
    if not 0 < maxval < 65536 or px.min(initial=0) < 0 or px.max(initial=0) > maxval:
        raise PGMError("pixel values must lie in [0, maxval] with maxval < 65536")
    height, width = px.shape
    header = f"{'P5' if binary else 'P2'}\n{width} {height}\n{maxval}\n".encode()
    if binary:
        dtype = ">u2" if maxval > 255 else "u1"
        return header + px.astype(dtype).tobytes()
    rows = "\n".join(" ".join(str(v) for v in row) for row in px)
    return header + rows.encode() + b"\n"


def write_pgm(path: PathLike, pixels: np.ndarray, maxval: int, binary: bool = True) -> None:
    Path(path).write_bytes(format_pgm(pixels, maxval, binary))
