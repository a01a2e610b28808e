import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fdwp.image_core import (
    ImageError,
    ImageRecord,
    check_image,
    load_pgm,
    morphological_gradient,
    synth_fbm,
    write_pgm,
)


def test_load_pgm_normalizes():
    data = b"P5\n2 2\n255\n" + bytes([0, 255, 0, 255])
    np.testing.assert_array_equal(load_pgm(data), [[0.0, 1.0], [0.0, 1.0]])


def test_load_pgm_with_comment_and_16bit():
    raster = np.array([[0, 1000], [65535, 2]], dtype=">u2")
    data = b"P5\n# made by hand\n2 2\n65535\n" + raster.tobytes()
    np.testing.assert_allclose(load_pgm(data), raster / 65535.0)


@pytest.mark.parametrize("data", [
    b"P5\n4 4\n255\n" + bytes(8),          # payload short
    b"P5\n2 2\n255\n" + bytes(5),          # payload long
    b"P5\n2 2\n0\n" + bytes(4),            # maxval 0
    b"P2\n2 2\n255\n0 0 0 0",              # ascii variant
    b"P5\n2 x\n255\n" + bytes(4),
    b"P5\n2 2",
])
def test_load_pgm_rejects_malformed(data):
    with pytest.raises(ImageError):
        load_pgm(data)


def test_size_mismatch_message():
    with pytest.raises(ImageError, match="payload"):
        load_pgm(b"P5\n4 4\n255\n" + bytes(8))


@settings(max_examples=50)
@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12))))
def test_pgm_round_trip_is_identity(raster):
    h, w = raster.shape
    data = f"P5\n{w} {h}\n255\n".encode() + raster.tobytes()
    assert write_pgm(load_pgm(data)) == data


def test_check_image_rejects_nan():
    img = np.zeros((8, 8))
    img[3, 3] = np.nan
    with pytest.raises(ImageError):
        check_image(img)
    with pytest.raises(ImageError):
        check_image(np.zeros((4, 4)), min_size=8)


def test_record_needs_label():
    with pytest.raises(ImageError):
        ImageRecord(np.zeros((8, 8)), "", "x")


def test_gradient_constant_is_zero():
    np.testing.assert_array_equal(morphological_gradient(np.full((7, 9), 0.3)), 0.0)


def test_gradient_impulse():
    img = np.zeros((5, 5))
    img[2, 2] = 1.0
    expected = np.zeros((5, 5))
    expected[1:4, 1:4] = 1.0
    np.testing.assert_array_equal(morphological_gradient(img), expected)


def _gradient_oracle(img):
    h, w = img.shape
    out = np.zeros_like(img)
    for r in range(h):
        for c in range(w):
            block = [img[min(max(r + dr, 0), h - 1), min(max(c + dc, 0), w - 1)]
                     for dr in (-1, 0, 1) for dc in (-1, 0, 1)]
            out[r, c] = max(block) - min(block)
    return out


def test_gradient_step_edge():
    img = np.zeros((6, 8))
    img[:, 4:] = 1.0
    expected = _gradient_oracle(img)
    got = morphological_gradient(img)
    np.testing.assert_array_equal(got, expected)
    # only the two columns straddling the edge respond
    assert np.all(got[:, [3, 4]] == 1.0)
    assert np.all(np.delete(got, [3, 4], axis=1) == 0.0)


def test_gradient_matches_oracle_random(rng):
    img = rng.random((9, 11))
    np.testing.assert_array_equal(morphological_gradient(img), _gradient_oracle(img))


@settings(max_examples=30)
@given(arrays(np.float64, (6, 6), elements=st.floats(0, 1)))
def test_gradient_nonnegative_and_zero_on_flat_neighborhoods(img):
    g = morphological_gradient(img)
    assert np.all(g >= 0)
    oracle = _gradient_oracle(img)
    np.testing.assert_array_equal(g == 0, oracle == 0)


def test_fbm_deterministic():
    a = synth_fbm(64, 48, 0.3, seed=5)
    b = synth_fbm(64, 48, 0.3, seed=5)
    assert a.tobytes() == b.tobytes()
    assert a.shape == (48, 64)
    assert not np.array_equal(a, synth_fbm(64, 48, 0.3, seed=6))


def test_fbm_range():
    img = synth_fbm(64, 64, 0.7, seed=1)
    assert img.min() == 0.0 and img.max() == 1.0


@pytest.mark.parametrize("h", [0.0, 1.0, -0.1, 1.5])
def test_fbm_rejects_hurst(h):
    with pytest.raises(ValueError):
        synth_fbm(32, 32, h, 0)


def _radial_power_slope(img):
    # periodogram fit over the mid-frequency band, independent of the generator
    f = np.fft.fft2(img - img.mean())
    power = np.abs(f) ** 2
    fy = np.fft.fftfreq(img.shape[0])[:, None]
    fx = np.fft.fftfreq(img.shape[1])[None, :]
    r = np.hypot(fx, fy)
    edges = np.geomspace(2.0 / img.shape[0], 0.4, 20)
    xs, ys = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = (r >= lo) & (r < hi)
        if m.any():
            xs.append(np.log(r[m].mean()))
            ys.append(np.log(power[m].mean()))
    return np.polyfit(xs, ys, 1)[0]


def test_fbm_power_spectrum_slope():
    slope = _radial_power_slope(synth_fbm(256, 256, 0.5, seed=11))
    assert slope == pytest.approx(-3.0, abs=0.4)
