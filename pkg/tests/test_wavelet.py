import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from fdwp.wavelet import (
    QUADRANTS,
    SubbandSet,
    WaveletError,
    analyze_level,
    db8_filters,
    dump_subbands,
    filter_support,
    reconstruct_level,
)
from fdwp.image_core import read_pgm_file


def _daubechies_oracle(p=4):
    """Minimum-phase Daubechies filter from spectral factorization."""
    # P(y) = sum_k C(p-1+k, k) y^k, y = (1 - cos w)/2; roots in z via y = -(z - 2 + 1/z)/4
    from math import comb
    q = np.zeros(1)
    for k in range(p):
        term = np.array([comb(p - 1 + k, k)])
        base = np.array([-0.25, 0.5, -0.25])  # (-z^-1 + 2 - z)/4 times z
        poly = np.array([1.0])
        for _ in range(k):
            poly = P.polymul(poly, base)
        poly = np.pad(poly, (p - 1 - k, p - 1 - k)) * term
        q = poly if q.size == 1 else q + poly
    roots = np.roots(q[::-1])
    inside = roots[np.abs(roots) < 1]
    h = np.real(np.poly(np.concatenate([inside, -np.ones(p)])))
    h = h / h.sum() * np.sqrt(2)
    return h[::-1] if abs(h[0]) < abs(h[-1]) else h


def test_filter_sum_and_norm():
    f = db8_filters()
    assert f.h0.size == 8
    assert abs(f.h0.sum() - np.sqrt(2)) <= 1e-12
    assert abs(np.sum(f.h0 ** 2) - 1.0) <= 1e-12
    assert abs(f.h1.sum()) <= 1e-12


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_filter_orthonormality(m):
    h = db8_filters().h0
    lagged = np.sum(h[: 8 - 2 * m] * h[2 * m:])
    assert abs(lagged - (1.0 if m == 0 else 0.0)) <= 1e-12


def test_filter_qmf():
    f = db8_filters()
    assert f.h1[0] == f.h0[7]
    assert f.h1[1] == -f.h0[6]
    for k in range(8):
        assert f.h1[k] == (-1) ** k * f.h0[7 - k]


def test_filter_matches_spectral_factorization():
    np.testing.assert_allclose(db8_filters().h0, _daubechies_oracle(4), atol=1e-10)


def test_filter_vanishing_moments():
    h1 = db8_filters().h1
    k = np.arange(8)
    for m in range(4):
        assert abs(np.sum(k ** m * h1)) < 1e-9


@pytest.mark.parametrize("level", [1, 2, 3])
def test_constant_image(level):
    sub = analyze_level(np.full((64, 64), 0.3), level=level)
    np.testing.assert_allclose(sub.ll, 0.6, atol=1e-12)
    for b in (sub.lh, sub.hl, sub.hh):
        np.testing.assert_allclose(b, 0.0, atol=1e-12)


@pytest.mark.parametrize("level", [1, 2, 3, 4])
def test_shapes_preserved(rng, level):
    img = rng.random((64, 80))
    sub = analyze_level(img, level=level, path=("HH",) * (level - 1))
    for b in sub.bands().values():
        assert b.shape == img.shape
    assert sub.path == ("HH",) * (level - 1)


@pytest.mark.parametrize("level", [1, 2, 3])
def test_energy_identity(rng, level):
    img = rng.standard_normal((64, 64))
    sub = analyze_level(img, level=level)
    total = sum(np.sum(b ** 2) for b in sub.bands().values())
    assert total == pytest.approx(4 * np.sum(img ** 2), rel=1e-6)


def test_matches_fft_oracle(rng):
    # circular convolution by FFT with the zero-upsampled filters
    img = rng.random((32, 32))
    f = db8_filters()
    level = 2
    up = lambda h: np.concatenate([[c] + [0.0] * (2 ** (level - 1) - 1) for c in h])
    def conv(x, h, axis):
        n = x.shape[axis]
        H = np.fft.fft(np.pad(up(h), (0, n - len(up(h)))))
        shape = [1, 1]
        shape[axis] = n
        return np.real(np.fft.ifft(np.fft.fft(x, axis=axis) * H.reshape(shape), axis=axis))
    lo, hi = conv(img, f.h0, 1), conv(img, f.h1, 1)
    sub = analyze_level(img, f, level)
    np.testing.assert_allclose(sub.ll, conv(lo, f.h0, 0), atol=1e-12)
    np.testing.assert_allclose(sub.lh, conv(lo, f.h1, 0), atol=1e-12)
    np.testing.assert_allclose(sub.hl, conv(hi, f.h0, 0), atol=1e-12)
    np.testing.assert_allclose(sub.hh, conv(hi, f.h1, 0), atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("level", [1, 2, 3])
def test_perfect_reconstruction(seed, level):
    img = np.random.default_rng(seed).random((64, 64))
    rec = reconstruct_level(analyze_level(img, level=level))
    assert np.max(np.abs(rec - img)) <= 1e-8


def test_reconstruct_zero_and_constant():
    z = np.zeros((32, 32))
    sub = SubbandSet(z, z, z, z, level=2, path=("LL",))
    np.testing.assert_array_equal(reconstruct_level(sub), z)
    c = np.full((32, 32), 0.7)
    np.testing.assert_allclose(reconstruct_level(analyze_level(c, level=2)), c, atol=1e-10)


def test_subband_shape_mismatch():
    with pytest.raises(WaveletError):
        SubbandSet(np.zeros((8, 8)), np.zeros((8, 8)), np.zeros((8, 8)), np.zeros((8, 9)), level=1)
    with pytest.raises(WaveletError):
        SubbandSet(*(np.zeros((8, 8)),) * 4, level=2, path=())


def test_shift_covariance(rng):
    img = rng.random((48, 48))
    shifted = np.roll(img, (5, -3), axis=(0, 1))
    a, b = analyze_level(img, level=2), analyze_level(shifted, level=2)
    for q in QUADRANTS:
        np.testing.assert_allclose(b.band(q), np.roll(a.band(q), (5, -3), axis=(0, 1)), atol=1e-10)


def test_linearity(rng):
    x, y = rng.random((40, 40)), rng.random((40, 40))
    a, b = 1.7, -0.4
    s = analyze_level(a * x + b * y, level=3)
    sx, sy = analyze_level(x, level=3), analyze_level(y, level=3)
    for q in QUADRANTS:
        np.testing.assert_allclose(s.band(q), a * sx.band(q) + b * sy.band(q), atol=1e-10)


def test_too_small_for_level():
    assert filter_support(8, 3) == 29
    analyze_level(np.zeros((29, 29)) + np.eye(29), level=3)
    with pytest.raises(WaveletError):
        analyze_level(np.zeros((28, 40)), level=3)


def test_symmetric_mode_constant(rng):
    sub = analyze_level(np.full((32, 32), 0.25), level=1, mode="symmetric")
    np.testing.assert_allclose(sub.ll, 0.5, atol=1e-12)
    np.testing.assert_allclose(sub.hh, 0.0, atol=1e-12)
    with pytest.raises(WaveletError):
        analyze_level(np.zeros((32, 32)), level=1, mode="zero")


def test_dump_subbands(tmp_path, rng):
    sub = analyze_level(rng.random((32, 32)), level=2, path=("HH",))
    paths = dump_subbands(sub, tmp_path, "img")
    assert sorted(p.name for p in paths) == sorted(f"img_L2_{q}.pgm" for q in QUADRANTS)
    assert read_pgm_file(paths[0]).shape == (32, 32)
