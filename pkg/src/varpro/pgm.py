"""Binary PGM (P5, 8-bit) reader and writer.

Reading returns the image scaled to [0, 1]; writing rescales the image
linearly to the full 8-bit range.  Row-major pixel order per the format.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .fileio import atomic_write_bytes


class PgmError(IOError):
    """Malformed or unsupported PGM file; the message names the path."""


def _read_header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(data):
            raise ValueError("truncated header")
        ch = data[pos : pos + 1]
        if ch == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(data) and not data[pos : pos + 1].isspace():
                pos += 1
            tokens.append(data[start:pos])
    return tokens, pos + 1  # skip the single whitespace after maxval


def read_pgm(path) -> np.ndarray:
    """Load a binary 8-bit PGM as a float array in [0, 1]."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise PgmError(f"cannot read PGM file {path}: {exc}") from exc
    try:
        tokens, offset = _read_header_tokens(data, 4)
        magic, width, height, maxval = tokens
        if magic != b"P5":
            raise ValueError(f"unsupported magic {magic!r} (binary P5 only)")
        width, height, maxval = int(width), int(height), int(maxval)
        if not (0 < maxval < 256):
            raise ValueError(f"unsupported maxval {maxval} (8-bit only)")
        pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=offset)
        if pixels.size != width * height:
            raise ValueError("truncated pixel data")
    except ValueError as exc:
        raise PgmError(f"malformed PGM file {path}: {exc}") from exc
    return pixels.reshape(height, width).astype(float) / maxval


def write_pgm(path, image: np.ndarray) -> None:
    """Write a 2-D array as binary PGM, linearly rescaled to [0, 255]."""
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError("write_pgm expects a 2-D array")
    lo, hi = float(image.min()), float(image.max())
    if hi > lo:
        scaled = (image - lo) / (hi - lo) * 255.0
    else:
        scaled = np.zeros_like(image)
    pixels = np.clip(np.rint(scaled), 0, 255).astype(np.uint8)
    header = f"P5\n{image.shape[1]} {image.shape[0]}\n255\n".encode("ascii")
    atomic_write_bytes(path, header + pixels.tobytes())
