"""Grayscale raster images: PGM file I/O and area-average resampling.

A grayscale image is a 2-D ``numpy.uint8`` array indexed ``[row, col]``.
The file format is binary PGM (P5) with maxval 255; nothing else is
accepted or produced.

The package-wide rounding rule lives here: round half away from zero,
then clamp to [0, 255].
"""

from __future__ import annotations

import numpy as np

GrayImage = np.ndarray  # 2-D uint8, shape (height, width)


class PgmError(ValueError):
    """Malformed or unsupported PGM content."""


def round_half_away(x):
    """Round to nearest integer, halves away from zero. Returns float array."""
    x = np.asarray(x, dtype=np.float64)
    return np.trunc(x + np.copysign(0.5, x))


def to_u8(x) -> np.ndarray:
    """Apply the global rounding rule and clamp to the uint8 range."""
    return np.clip(round_half_away(x), 0, 255).astype(np.uint8)


def as_gray(img) -> GrayImage:
    """Validate an array as a grayscale image (2-D uint8, nonempty)."""
    a = np.asarray(img)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"expected nonempty 2-D image, got shape {a.shape}")
    if a.dtype != np.uint8:
        raise ValueError(f"expected uint8 pixels, got {a.dtype}")
    return a


def _next_token(data: bytes, pos: int) -> tuple[bytes, int, int]:
    """Return (token, token_start, next_pos), skipping whitespace and comments."""
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    if pos >= n:
        raise PgmError(f"unexpected end of header at byte {pos}")
    start = pos
    while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    return data[start:pos], start, pos


def _int_token(data: bytes, pos: int, what: str) -> tuple[int, int]:
    tok, start, pos = _next_token(data, pos)
    try:
        val = int(tok)
    except ValueError:
        raise PgmError(f"bad {what} {tok!r} at byte {start}") from None
    if val <= 0:
        raise PgmError(f"bad {what} {val} at byte {start}")
    return val, pos


def load_pgm(path) -> GrayImage:
    """Read a binary (P5) PGM file with maxval 255.

    Pixel values are returned exactly as stored. Header comments are
    accepted; parse failures name the offending byte offset.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    magic, start, pos = _next_token(data, 0)
    if magic != b"P5":
        raise PgmError(f"not a binary PGM (magic {magic!r} at byte {start})")
    width, pos = _int_token(data, pos, "width")
    height, pos = _int_token(data, pos, "height")
    maxval_tok, mstart, pos = _next_token(data, pos)
    try:
        maxval = int(maxval_tok)
    except ValueError:
        raise PgmError(f"bad maxval {maxval_tok!r} at byte {mstart}") from None
    if maxval != 255:
        raise PgmError(f"unsupported maxval {maxval} at byte {mstart} (only 255)")
    # Exactly one whitespace byte separates the header from the payload.
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise PgmError(f"missing whitespace before payload at byte {pos}")
    pos += 1
    need = width * height
    payload = data[pos : pos + need]
    if len(payload) < need:
        raise PgmError(
            f"truncated payload at byte {pos + len(payload)}: "
            f"expected {need} pixel bytes, got {len(payload)}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()


def save_pgm(img: GrayImage, path) -> None:
    """Write a canonical P5 file: ``P5\\n<w> <h>\\n255\\n`` then raw bytes."""
    img = as_gray(img)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(img.tobytes())


def _integral(img: GrayImage) -> np.ndarray:
    """Summed-area table S with S[i, j] = sum of img[:i, :j], shape (h+1, w+1)."""
    h, w = img.shape
    s = np.zeros((h + 1, w + 1), dtype=np.float64)
    np.cumsum(np.cumsum(img, axis=0, dtype=np.float64), axis=1, out=s[1:, 1:])
    return s


def _sample_axis(table: np.ndarray, coords: np.ndarray, axis: int) -> np.ndarray:
    """Linearly interpolate `table` along `axis` at fractional `coords`."""
    idx = np.floor(coords).astype(np.intp)
    idx = np.minimum(idx, table.shape[axis] - 1)
    frac = coords - idx
    lo = np.take(table, idx, axis=axis)
    hi = np.take(table, np.minimum(idx + 1, table.shape[axis] - 1), axis=axis)
    shape = [1] * table.ndim
    shape[axis] = len(coords)
    f = frac.reshape(shape)
    return lo * (1.0 - f) + hi * f

def resize_scale(img: GrayImage, scale: float) -> GrayImage:
    """Downsample by area averaging to floor(dim * scale) per axis.

    Each output pixel is the mean of its source footprint; fractional
    footprints weight source pixels by coverage. ``scale=1.0`` returns a
    pixel-identical copy.
    """
    img = as_gray(img)
    if not 0.0 < scale <= 1.0:
        raise ValueError(f"scale must be in (0, 1], got {scale}")
    if scale == 1.0:
        return img.copy()
    h, w = img.shape
    oh, ow = int(h * scale), int(w * scale)
    if oh < 1 or ow < 1:
        raise ValueError(f"scale {scale} collapses {w}x{h} image to zero size")
    # The integral of a piecewise-constant image over [0,y)x[0,x) is the
    # bilinear interpolation of the summed-area table at (y, x), so exact
    # coverage-weighted footprint sums come from four interpolated corners.
    sat = _integral(img)
    ys = np.arange(oh + 1, dtype=np.float64) * h / oh
    xs = np.arange(ow + 1, dtype=np.float64) * w / ow
    grid = _sample_axis(_sample_axis(sat, ys, axis=0), xs, axis=1)
    sums = grid[1:, 1:] - grid[:-1, 1:] - grid[1:, :-1] + grid[:-1, :-1]
    areas = np.outer(np.diff(ys), np.diff(xs))
    return to_u8(sums / areas)
