"""Fractal dimension of an intensity surface from the fBm increment law.

For a fractional Brownian surface the mean absolute intensity difference of
pixel pairs grows as ``E(d) = K * d**H``.  The Hurst exponent H is the slope
of log E(d) against log d, and the surface fractal dimension is ``3 - H``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image_core import check_image


class DegenerateSurface(ValueError):
    """The mean absolute increment vanished at some distance (log undefined)."""


@dataclass(frozen=True)
class FdEstimate:
    fd: float
    hurst: float
    log_intercept: float
    r_squared: float
    max_distance: int
    slope: float  # unclamped regression slope


def default_max_distance(shape) -> int:
    """32 pixels for 512-pixel images, ``min(shape) // 16`` in general (>= 2)."""
    return max(2, min(shape) // 16)


def mean_abs_increments(img, max_distance: int) -> np.ndarray:
    """E(d) for d = 1..max_distance over pooled horizontal and vertical pairs."""
    arr = np.asarray(img, dtype=np.float64)
    out = np.empty(max_distance)
    for d in range(1, max_distance + 1):
        horiz = np.abs(arr[:, d:] - arr[:, :-d])
        vert = np.abs(arr[d:, :] - arr[:-d, :])
        out[d - 1] = (horiz.sum() + vert.sum()) / (horiz.size + vert.size)
    return out


def estimate_fd(img, max_distance: int | None = None) -> FdEstimate:
    """Estimate the fractal dimension of `img`.

    Parameters
    ----------
    img : array_like
        2-D intensity surface; any affine intensity scaling gives the same FD.
    max_distance : int, optional
        Largest pixel offset in the log-log fit; defaults to
        `default_max_distance`.  Must satisfy
        ``2 <= max_distance <= min(img.shape) / 4``.

    Raises
    ------
    DegenerateSurface
        If E(d) is zero for some d, e.g. for a constant image.
    """
    arr = check_image(img)
    if max_distance is None:
        max_distance = default_max_distance(arr.shape)
    if max_distance < 2:
        raise ValueError(f"max_distance must be >= 2, got {max_distance}")
    if 4 * max_distance > min(arr.shape):
        raise ValueError(
            f"max_distance {max_distance} exceeds a quarter of the smallest image side ({min(arr.shape)})"
        )

    e = mean_abs_increments(arr, max_distance)
    # relative guard: rounding residue on a flat surface is not roughness
    scale = np.abs(arr).max()
    if np.any(e <= 1e-13 * scale) or scale == 0.0:
        raise DegenerateSurface("mean absolute increment is zero; surface is flat at some scale")

    x = np.log(np.arange(1, max_distance + 1, dtype=np.float64))
    y = np.log(e)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    sxy = np.sum((x - xm) * (y - ym))
    syy = np.sum((y - ym) ** 2)
    slope = sxy / sxx
    intercept = ym - slope * xm
    r2 = 1.0 if syy == 0.0 else min(1.0, max(0.0, sxy * sxy / (sxx * syy)))

    hurst = float(min(1.0, max(0.0, slope)))
    return FdEstimate(
        fd=3.0 - hurst,
        hurst=hurst,
        log_intercept=float(intercept),
        r_squared=float(r2),
        max_distance=int(max_distance),
        slope=float(slope),
    )
