"""Undecimated 2-D separable wavelet analysis with the 8-tap Daubechies pair.

Each analysis level keeps the input size.  Level ``j`` uses the à-trous
filters, i.e. the base filters with ``2**(j-1) - 1`` zeros between taps, and
circular convolution so the transform is exactly invertible and
shift-covariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .image_core import check_image, rescale_unit, write_pgm_file

QUADRANTS = ("LL", "LH", "HL", "HH")

# Orthonormal Daubechies scaling filter with 4 vanishing moments (8 taps),
# minimum phase, from 50-digit spectral factorization.
_DB8_H0 = np.array([
    0.23037781330889650086,
    0.71484657055291564709,
    0.63088076792985890788,
    -0.027983769416859854211,
    -0.18703481171909308408,
    0.030841381835560763627,
    0.032883011666885199735,
    -0.010597401785069032105,
])


class WaveletError(ValueError):
    pass


@dataclass(frozen=True)
class FilterPair:
    h0: np.ndarray
    h1: np.ndarray

    def __post_init__(self):
        if len(self.h0) != len(self.h1):
            raise WaveletError("scaling and wavelet filters differ in length")

    @property
    def taps(self) -> int:
        return len(self.h0)


@dataclass(frozen=True)
class SubbandSet:
    """Four same-size subbands from one undecimated analysis level.

    `path` holds the quadrant labels leading to the analyzed parent node, so
    ``len(path) == level - 1``.
    """

    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray
    level: int
    path: tuple = field(default=())

    def __post_init__(self):
        shapes = {b.shape for b in (self.ll, self.lh, self.hl, self.hh)}
        if len(shapes) != 1:
            raise WaveletError(f"subband shapes disagree: {sorted(shapes)}")
        if self.level < 1:
            raise WaveletError(f"level must be >= 1, got {self.level}")
        if len(self.path) != self.level - 1:
            raise WaveletError(f"path {self.path} inconsistent with level {self.level}")

    @property
    def shape(self):
        return self.ll.shape

    def band(self, quadrant: str) -> np.ndarray:
        return getattr(self, quadrant.lower())

    def bands(self):
        return {q: self.band(q) for q in QUADRANTS}


def db8_filters() -> FilterPair:
    """Return the 8-tap Daubechies scaling filter and its QMF wavelet filter."""
    h0 = _DB8_H0.copy()
    k = np.arange(len(h0))
    h1 = (-1.0) ** k * h0[::-1]
    h0.flags.writeable = False
    h1.flags.writeable = False
    return FilterPair(h0, h1)


def filter_support(taps: int, level: int) -> int:
    """Length of the à-trous filter with `taps` coefficients at `level`."""
    return (taps - 1) * 2 ** (level - 1) + 1


def _circular_filter(x: np.ndarray, h: np.ndarray, step: int, axis: int, mode: str) -> np.ndarray:
    # y[n] = sum_k h[k] x[n - k*step]
    n = x.shape[axis]
    if mode == "periodic":
        out = np.zeros_like(x)
        for k, c in enumerate(h):
            out += c * np.roll(x, k * step, axis=axis)
        return out
    if mode == "symmetric":
        pad = (len(h) - 1) * step
        widths = [(0, 0), (0, 0)]
        widths[axis] = (pad, 0)
        xp = np.pad(x, widths, mode="symmetric")
        out = np.zeros_like(x)
        for k, c in enumerate(h):
            start = pad - k * step
            out += c * np.take(xp, np.arange(start, start + n), axis=axis)
        return out
    raise WaveletError(f"unknown boundary mode {mode!r}")


def analyze_level(img, filters: FilterPair | None = None, level: int = 1,
                  path=None, mode: str = "periodic") -> SubbandSet:
    """One undecimated 2-D analysis step.

    Rows are filtered first (along axis 1), then columns (axis 0).  Subband
    naming follows ``lh = h0(rows) x h1(cols)`` and ``hl = h1(rows) x h0(cols)``.
    Without an explicit `path` the parent is recorded as ``"*"`` per level.

    Raises
    ------
    WaveletError
        If either image side is shorter than the upsampled filter support.
    """
    filters = filters or db8_filters()
    if level < 1:
        raise WaveletError(f"level must be >= 1, got {level}")
    arr = check_image(img)
    support = filter_support(filters.taps, level)
    if min(arr.shape) < support:
        raise WaveletError(
            f"image {arr.shape[1]}x{arr.shape[0]} is smaller than the level-{level} filter support ({support})"
        )
    step = 2 ** (level - 1)
    lo_r = _circular_filter(arr, filters.h0, step, axis=1, mode=mode)
    hi_r = _circular_filter(arr, filters.h1, step, axis=1, mode=mode)
    return SubbandSet(
        ll=_circular_filter(lo_r, filters.h0, step, axis=0, mode=mode),
        lh=_circular_filter(lo_r, filters.h1, step, axis=0, mode=mode),
        hl=_circular_filter(hi_r, filters.h0, step, axis=0, mode=mode),
        hh=_circular_filter(hi_r, filters.h1, step, axis=0, mode=mode),
        level=level,
        path=tuple(path) if path is not None else ("*",) * (level - 1),
    )


def reconstruct_level(sub: SubbandSet, filters: FilterPair | None = None) -> np.ndarray:
    """Invert `analyze_level` (periodic mode).

    Each subband is filtered with the time-reversed analysis filters and the
    four results are averaged; under periodic extension the pair satisfies
    |H0|^2 + |H1|^2 = 2 per axis, which makes this exact.
    """
    filters = filters or db8_filters()
    step = 2 ** (sub.level - 1)

    def synth(x, h, axis):
        # correlation with h == convolution with reversed h, shifted back
        out = np.zeros_like(x)
        for k, c in enumerate(h):
            out += c * np.roll(x, -k * step, axis=axis)
        return out

    lo = synth(sub.ll, filters.h0, 0) + synth(sub.lh, filters.h1, 0)
    hi = synth(sub.hl, filters.h0, 0) + synth(sub.hh, filters.h1, 0)
    return (synth(lo, filters.h0, 1) + synth(hi, filters.h1, 1)) / 4.0


def dump_subbands(sub: SubbandSet, directory, stem: str) -> list[Path]:
    """Write each subband as ``<stem>_L<level>_<Q>.pgm`` after rescaling.

    Debug output only: the rescale discards sign and gain.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for q, band in sub.bands().items():
        p = directory / f"{stem}_L{sub.level}_{q}.pgm"
        write_pgm_file(p, rescale_unit(band))
        written.append(p)
    return written
