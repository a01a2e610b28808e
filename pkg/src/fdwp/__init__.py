"""Fractal-dimension-guided wavelet packet texture classification."""

__version__ = "0.1.0"
