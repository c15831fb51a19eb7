"""Grayscale rasters, PGM input/output and unfolding into 1-D series."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import BadMagic, InputError, RangeError, TooShort, TooSmall, TruncatedData

MIN_SERIES_LENGTH = 64
SCAN_ORDER = "raster"


class UnfoldDirection(str, enum.Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """Rectangular grayscale raster.

    ``pixels`` is a read-only integer array of shape ``(rows, cols)``.
    """

    rows: int
    cols: int
    max_value: int
    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InputError(f"image dimensions must be positive, got {self.rows}x{self.cols}")
        if not 1 <= self.max_value <= 65535:
            raise RangeError(f"max_value {self.max_value} outside [1, 65535]")
        px = np.asarray(self.pixels)
        if px.size != self.rows * self.cols:
            raise InputError(
                f"expected {self.rows * self.cols} pixels, got {px.size}"
            )
        if px.size and not np.issubdtype(px.dtype, np.integer):
            if not np.all(np.equal(np.mod(px, 1), 0)):
                raise InputError("pixel values must be integers")
        px = px.astype(np.int64).reshape(self.rows, self.cols)
        if px.min() < 0 or px.max() > self.max_value:
            raise RangeError(
                f"pixel values must lie in [0, {self.max_value}], "
                f"found [{px.min()}, {px.max()}]"
            )
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @classmethod
    def from_array(cls, array, max_value=None) -> "ImageGrid":
        a = np.asarray(array)
        if a.ndim != 2:
            raise InputError(f"expected a 2-D array, got shape {a.shape}")
        if max_value is None:
            max_value = max(int(a.max()), 1)
        return cls(a.shape[0], a.shape[1], int(max_value), a)

    def transpose(self) -> "ImageGrid":
        return ImageGrid(self.cols, self.rows, self.max_value, self.pixels.T)

    def __eq__(self, other):
        if not isinstance(other, ImageGrid):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and self.max_value == other.max_value
            and np.array_equal(self.pixels, other.pixels)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SpatialSeries:
    """A finite real 1-D series of at least 64 samples plus a provenance label."""

    values: np.ndarray = field(repr=False)
    provenance: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size < MIN_SERIES_LENGTH:
            raise TooShort(
                f"series has {v.size} samples; at least {MIN_SERIES_LENGTH} are required"
            )
        if not np.all(np.isfinite(v)):
            raise InputError("series contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


# -- PGM ---------------------------------------------------------------------

_WS = b" \t\n\r\v\f"


def _header_tokens(data: bytes, count: int, pos: int):
    """Read ``count`` whitespace-separated header tokens, skipping # comments.

    Returns the tokens and the offset just past the last token.
    """
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos] in _WS:
            pos += 1
        if pos >= n:
            raise TruncatedData("PGM header ends prematurely")
        if data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and data[pos] not in _WS and data[pos] != ord("#"):
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def _int_token(tok: bytes, what: str) -> int:
    try:
        return int(tok.decode("ascii"))
    except (UnicodeDecodeError, ValueError):
        raise InputError(f"PGM {what} is not an integer: {tok[:20]!r}") from None


def load_pgm(data: bytes) -> ImageGrid:
    """Parse an ASCII (P2) or binary (P5) PGM image.

    16-bit binary samples are big-endian. Only the first image of a
    multi-image file is read.
    """
    magic = data[:2]
    if magic not in (b"P2", b"P5") or (len(data) > 2 and data[2] not in _WS + b"#"):
        raise BadMagic(f"not a P2/P5 PGM file (magic {data[:2]!r})")
    (w, h, mv), pos = _header_tokens(data, 3, 2)
    cols = _int_token(w, "width")
    rows = _int_token(h, "height")
    max_value = _int_token(mv, "max value")
    if rows < 1 or cols < 1:
        raise InputError(f"PGM dimensions must be positive, got {cols}x{rows}")
    if not 1 <= max_value <= 65535:
        raise RangeError(f"PGM max value {max_value} outside [1, 65535]")
    count = rows * cols

    if magic == b"P5":
        if pos >= len(data):
            raise TruncatedData("PGM raster missing")
        pos += 1  # single whitespace byte after max value
        width = 1 if max_value < 256 else 2
        raster = data[pos : pos + count * width]
        if len(raster) < count * width:
            raise TruncatedData(
                f"expected {count} samples, found {len(raster) // width}"
            )
        pixels = np.frombuffer(raster, dtype=">u1" if width == 1 else ">u2")
    else:
        body = re.sub(rb"#[^\r\n]*", b" ", data[pos:])
        tokens = body.split()
        if len(tokens) < count:
            raise TruncatedData(f"expected {count} samples, found {len(tokens)}")
        try:
            pixels = np.array([int(t) for t in tokens[:count]], dtype=np.int64)
        except ValueError:
            raise InputError("PGM raster contains a non-integer sample") from None

    pixels = pixels.astype(np.int64)
    if pixels.size and (pixels.max() > max_value or pixels.min() < 0):
        raise RangeError(f"sample value {pixels.max()} exceeds max value {max_value}")
    return ImageGrid(rows, cols, max_value, pixels.reshape(rows, cols))


def read_pgm(path) -> ImageGrid:
    with open(path, "rb") as fh:
        return load_pgm(fh.read())


def serialize_pgm(grid: ImageGrid, binary: bool = True) -> bytes:
    header = f"{'P5' if binary else 'P2'}\n{grid.cols} {grid.rows}\n{grid.max_value}\n"
    if binary:
        dtype = ">u1" if grid.max_value < 256 else ">u2"
        return header.encode("ascii") + grid.pixels.astype(dtype).tobytes()
    lines = [" ".join(str(int(v)) for v in row) for row in grid.pixels]
    return (header + "\n".join(lines) + "\n").encode("ascii")


# -- unfolding ---------------------------------------------------------------

def raster_scan(grid: ImageGrid, direction: UnfoldDirection | str) -> np.ndarray:
    """Horizontal concatenates rows top to bottom; vertical concatenates
    columns left to right."""
    order = "C" if UnfoldDirection(direction) is UnfoldDirection.HORIZONTAL else "F"
    return grid.pixels.ravel(order=order).astype(float)


def unfold(grid: ImageGrid, direction: UnfoldDirection | str, label: str = "") -> SpatialSeries:
    """Flatten ``grid`` into a series by raster scan (see ``raster_scan``)."""
    direction = UnfoldDirection(direction)
    if grid.rows * grid.cols < MIN_SERIES_LENGTH:
        raise TooSmall(
            f"image has {grid.rows * grid.cols} pixels; at least {MIN_SERIES_LENGTH} are required"
        )
    values = raster_scan(grid, direction)
    prov = f"{label}:{direction.value}" if label else direction.value
    return SpatialSeries(values, prov)
