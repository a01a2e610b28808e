"""Baseline subband signatures: mean energy and co-occurrence statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image_core import check_image, rescale_unit

ORIENTATIONS = (0, 45, 90, 135)

# displacement per unit distance as (column, row); rows grow downward
_UNIT_OFFSETS = {0: (1, 0), 45: (1, -1), 90: (0, -1), 135: (-1, -1)}


def subband_energy(img) -> float:
    """Mean squared coefficient ``(1/MN) * sum(x**2)``."""
    arr = np.asarray(img, dtype=np.float64)
    return float(np.mean(arr * arr))


@dataclass(frozen=True)
class GlcmMatrix:
    probs: np.ndarray
    levels: int
    distance: int
    orientation: int
    pair_count: int  # symmetric count before normalization


@dataclass(frozen=True)
class GlcmFeatures:
    correlation: float
    entropy: float
    energy: float

    def as_tuple(self):
        return (self.correlation, self.entropy, self.energy)


def quantize(img, levels: int) -> np.ndarray:
    """Map [0, 1] intensities onto integer bins 0..levels-1 of equal width."""
    arr = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return np.minimum((arr * levels).astype(np.int64), levels - 1)


def glcm_offset(orientation: int, distance: int) -> tuple[int, int]:
    try:
        dc, dr = _UNIT_OFFSETS[int(orientation)]
    except KeyError:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}, got {orientation}") from None
    return dc * distance, dr * distance


def glcm_compute(img, levels: int = 16, distance: int = 1, orientation: int = 0) -> GlcmMatrix:
    """Symmetric, normalized gray-level co-occurrence matrix.

    Pairs are ``(p, p + offset)`` for every in-bounds pixel ``p``; the
    transposed counts are added before normalizing.
    """
    arr = check_image(img)
    if not 2 <= levels <= 256:
        raise ValueError(f"levels must be in 2..256, got {levels}")
    if distance < 1 or distance >= min(arr.shape):
        raise ValueError(f"distance {distance} invalid for a {arr.shape[1]}x{arr.shape[0]} image")
    q = quantize(arr, levels)
    dc, dr = glcm_offset(orientation, distance)
    rows, cols = q.shape
    r0, r1 = max(0, -dr), rows - max(0, dr)
    c0, c1 = max(0, -dc), cols - max(0, dc)
    if r1 <= r0 or c1 <= c0:
        raise ValueError("no valid pixel pairs for this geometry")
    first = q[r0:r1, c0:c1]
    second = q[r0 + dr:r1 + dr, c0 + dc:c1 + dc]
    counts = np.bincount((first * levels + second).ravel(), minlength=levels * levels)
    counts = counts.reshape(levels, levels)
    counts = counts + counts.T
    total = int(counts.sum())
    return GlcmMatrix(counts / total, levels, distance, int(orientation), total)


def glcm_features(m: GlcmMatrix) -> GlcmFeatures:
    """Haralick energy, entropy (bits) and correlation of a normalized GLCM.

    Correlation is 0 by convention when either marginal has zero variance.
    """
    p = m.probs
    idx = np.arange(p.shape[0], dtype=np.float64)
    px, py = p.sum(axis=1), p.sum(axis=0)
    mu_i, mu_j = idx @ px, idx @ py
    sd_i = np.sqrt(((idx - mu_i) ** 2) @ px)
    sd_j = np.sqrt(((idx - mu_j) ** 2) @ py)
    energy = float(np.sum(p * p))
    nz = p[p > 0]
    entropy = float(-np.sum(nz * np.log2(nz)))
    if sd_i * sd_j > 0:
        corr = float(np.outer(idx - mu_i, idx - mu_j).ravel() @ p.ravel() / (sd_i * sd_j))
        corr = min(1.0, max(-1.0, corr))
    else:
        corr = 0.0
    return GlcmFeatures(corr, entropy, energy)


def glcm_signature(band, levels: int = 16, distance: int = 1) -> GlcmFeatures:
    """Orientation-averaged GLCM features of a subband.

    The subband is affinely rescaled to [0, 1] first since wavelet
    coefficients are signed and unbounded.
    """
    unit = rescale_unit(band)
    feats = np.array([glcm_features(glcm_compute(unit, levels, distance, t)).as_tuple()
                      for t in ORIENTATIONS])
    return GlcmFeatures(*(float(v) for v in feats.mean(axis=0)))
