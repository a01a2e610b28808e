"""Grayscale image containers, PGM I/O, morphology and fBm texture synthesis.

Images are plain 2-D float64 numpy arrays (rows x columns) with nominal
intensities in [0, 1].  They are treated as immutable by every function in
this package.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage


class ImageError(ValueError):
    """Raised for malformed image data or PGM streams."""


@dataclass(frozen=True)
class ImageRecord:
    """A labeled dataset element."""

    image: np.ndarray
    label: str
    source: str

    def __post_init__(self):
        if not self.label:
            raise ImageError("image label must be non-empty")
        check_image(self.image)


def check_image(img, min_size: int = 1) -> np.ndarray:
    """Validate and return `img` as a 2-D float64 array.

    Raises ImageError if the array is not 2-D, has a side shorter than
    `min_size`, or contains non-finite values.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ImageError(f"expected a 2-D image, got shape {arr.shape}")
    if min(arr.shape) < min_size:
        raise ImageError(f"image {arr.shape[1]}x{arr.shape[0]} is smaller than {min_size} pixels")
    if not np.all(np.isfinite(arr)):
        raise ImageError("image contains NaN or infinite values")
    return arr


def rescale_unit(img: np.ndarray) -> np.ndarray:
    """Affinely map `img` onto [0, 1]; a constant image maps to zeros."""
    arr = np.asarray(img, dtype=np.float64)
    lo, hi = arr.min(), arr.max()
    if hi == lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)


# ----------------------------------------------------------------------------
# PGM
# ----------------------------------------------------------------------------

_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*([^\s#]+)")


def _header_tokens(data: bytes, count: int):
    pos = 0
    tokens = []
    for _ in range(count):
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise ImageError("malformed PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(data) or data[pos:pos + 1] not in b" \t\r\n":
        raise ImageError("malformed PGM header: missing separator before raster")
    return tokens, pos + 1


def load_pgm(data: bytes) -> np.ndarray:
    """Decode a binary (P5) PGM byte string into a [0, 1] float image."""
    tokens, offset = _header_tokens(bytes(data), 4)
    magic, *fields = tokens
    if magic != b"P5":
        raise ImageError(f"unsupported PGM magic {magic!r}; only binary P5 is accepted")
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError:
        raise ImageError("malformed PGM header: non-integer field") from None
    if width <= 0 or height <= 0:
        raise ImageError(f"invalid PGM dimensions {width}x{height}")
    if maxval <= 0 or maxval > 65535:
        raise ImageError(f"invalid PGM maxval {maxval}")

    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    expected = width * height * dtype.itemsize
    payload = data[offset:]
    if len(payload) != expected:
        raise ImageError(
            f"PGM payload is {len(payload)} bytes, header {width}x{height} (maxval {maxval}) needs {expected}"
        )
    raster = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return raster.astype(np.float64) / maxval


def write_pgm(img, maxval: int = 255) -> bytes:
    """Encode a [0, 1] image as binary PGM; values are clipped and rounded."""
    arr = check_image(img)
    if not 0 < maxval <= 65535:
        raise ImageError(f"invalid PGM maxval {maxval}")
    levels = np.rint(np.clip(arr, 0.0, 1.0) * maxval)
    dtype = ">u2" if maxval > 255 else "u1"
    height, width = arr.shape
    header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
    return header + levels.astype(dtype).tobytes()


def read_pgm_file(path) -> np.ndarray:
    return load_pgm(Path(path).read_bytes())


def write_pgm_file(path, img, maxval: int = 255) -> None:
    Path(path).write_bytes(write_pgm(img, maxval))


# ----------------------------------------------------------------------------
# preprocessing and synthesis
# ----------------------------------------------------------------------------

def morphological_gradient(img) -> np.ndarray:
    """Dilation minus erosion with a 3x3 square element, replicate borders."""
    arr = check_image(img)
    dil = ndimage.grey_dilation(arr, size=(3, 3), mode="nearest")
    ero = ndimage.grey_erosion(arr, size=(3, 3), mode="nearest")
    return dil - ero


def synth_fbm(width: int, height: int, hurst: float, seed: int) -> np.ndarray:
    """Fractional Brownian surface by spectral synthesis.

    A complex Gaussian spectrum is shaped with amplitude |f|^-(H+1), so the
    power falls as |f|^-(2H+2); the real part of its inverse FFT is rescaled
    onto [0, 1].  The theoretical surface fractal dimension is 3 - H.

    Parameters
    ----------
    width, height : int
        Output size in pixels.
    hurst : float
        Hurst exponent, strictly inside (0, 1).
    seed : int
        Seed for numpy's default generator; output is a pure function of
        all four arguments.
    """
    if not 0.0 < hurst < 1.0:
        raise ValueError(f"hurst must lie in (0, 1), got {hurst}")
    if width < 2 or height < 2:
        raise ValueError(f"fBm size must be at least 2x2, got {width}x{height}")
    rng = np.random.default_rng(seed)
    fy = np.fft.fftfreq(height)[:, None]
    fx = np.fft.fftfreq(width)[None, :]
    radius = np.hypot(fx, fy)
    radius[0, 0] = 1.0
    amplitude = radius ** -(hurst + 1.0)
    amplitude[0, 0] = 0.0
    spectrum = amplitude * (rng.standard_normal((height, width)) + 1j * rng.standard_normal((height, width)))
    field = np.fft.ifft2(spectrum).real
    return rescale_unit(field)


def fbm_descriptor(hurst: float, seed: int, width: int, height: int) -> str:
    return f"fbm:H={hurst:g}:seed={seed}:{width}x{height}"
