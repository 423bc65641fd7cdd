"""Grayscale image I/O and geometry helpers.

Images are plain 2D float64 numpy arrays, scaled to [0, 1] on load. The only
file format is PGM (P2 ASCII and P5 binary for reading, P5 for writing), which
keeps the numeric core free of image-decoding dependencies. Convert other
formats externally, e.g. ``convert face.png face.pgm`` (ImageMagick) or
``pnmtopnm``.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DataError, PgmError

_WHITESPACE = b" \t\r\n\v\f"
MAX_MAXVAL = 65535


def _skip_separators(data: bytes, pos: int) -> int:
    """Advance past whitespace and '#' comment lines."""
    n = len(data)
    while pos < n:
        if data[pos] == 0x23:  # '#'
            eol = data.find(b"\n", pos)
            pos = n if eol < 0 else eol + 1
        elif data[pos] in _WHITESPACE:
            pos += 1
        else:
            break
    return pos


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    pos = _skip_separators(data, pos)
    if pos >= len(data):
        raise PgmError("unexpected end of header", pos)
    end = pos
    while end < len(data) and data[end] not in _WHITESPACE and data[end] != 0x23:
        end += 1
    return data[pos:end], end


def _next_int(data: bytes, pos: int, what: str) -> tuple[int, int]:
    tok, end = _next_token(data, pos)
    if not tok.isdigit():
        raise PgmError(f"malformed header: expected {what}, got {tok!r}", pos)
    return int(tok), end


def load_image(path) -> np.ndarray:
    """Read a PGM file (P2 or P5) into a float64 array scaled to [0, 1].

    Raises FileNotFoundError for missing files and PgmError (with a byte
    offset where detectable) for unsupported magic numbers, malformed
    headers, or truncated pixel data.
    """
    data = Path(path).read_bytes()
    magic, pos = _next_token(data, 0) if data else (b"", 0)
    if magic not in (b"P2", b"P5"):
        raise PgmError(f"unsupported magic number {magic!r} (only P2/P5 grayscale PGM)", 0)
    cols, pos = _next_int(data, pos, "width")
    rows, pos = _next_int(data, pos, "height")
    maxval, pos = _next_int(data, pos, "maxval")
    if rows < 1 or cols < 1:
        raise PgmError(f"malformed header: bad dimensions {rows}x{cols}", pos)
    if not 1 <= maxval <= MAX_MAXVAL:
        raise PgmError(f"malformed header: maxval {maxval} outside 1..{MAX_MAXVAL}", pos)

    count = rows * cols
    if magic == b"P5":
        # Exactly one separator byte between maxval and the raster.
        if pos >= len(data) or data[pos] not in _WHITESPACE:
            raise PgmError("malformed header: missing separator before raster", pos)
        pos += 1
        width = 2 if maxval > 255 else 1
        raster = data[pos : pos + count * width]
        if len(raster) < count * width:
            raise PgmError(
                f"truncated pixel data: expected {count * width} bytes, got {len(raster)}",
                pos + len(raster),
            )
        dtype = ">u2" if maxval > 255 else np.uint8
        samples = np.frombuffer(raster, dtype=dtype, count=count).astype(np.float64)
    else:
        values = np.empty(count, dtype=np.float64)
        for i in range(count):
            val, pos = _next_int(data, pos, f"pixel {i}")
            values[i] = val
        samples = values
    if samples.max(initial=0) > maxval:
        raise PgmError(f"pixel value exceeds maxval {maxval}")
    return (samples / float(maxval)).reshape(rows, cols)


def save_image(img: np.ndarray, path) -> None:
    """Write a P5 binary PGM with maxval 255.

    Pixels are clamped to [0, 1] and rounded half-up to the nearest of the
    256 gray levels, so a reload differs from the clamped input by at most
    1/510 per pixel.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise DataError(f"expected a non-empty 2D image, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise DataError("image contains non-finite pixels")
    rows, cols = img.shape
    levels = np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    Path(path).write_bytes(header + levels.tobytes())


def pad_to_block(img: np.ndarray, block: int) -> tuple[np.ndarray, tuple[int, int]]:
    """Pad by edge replication so both dims are multiples of ``block``.

    Returns the padded image and the original (rows, cols) for a later crop.
    """
    if block < 1:
        raise DataError(f"block must be >= 1, got {block}")
    img = np.asarray(img, dtype=np.float64)
    rows, cols = img.shape
    pad_r = (-rows) % block
    pad_c = (-cols) % block
    if pad_r == 0 and pad_c == 0:
        return img, (rows, cols)
    return np.pad(img, ((0, pad_r), (0, pad_c)), mode="edge"), (rows, cols)


def crop(img: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """Top-left submatrix of the given (rows, cols)."""
    rows, cols = dims
    if rows > img.shape[0] or cols > img.shape[1]:
        raise DataError(f"crop dims {dims} exceed image shape {img.shape}")
    return np.ascontiguousarray(img[:rows, :cols])
