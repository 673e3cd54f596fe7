"""
FFT plumbing for the square torus [0, 2π)².

Grids are indexed [i1, i2] with axis 0 along θ₁ and axis 1 along θ₂.
Spectra are stored unshifted (numpy/scipy FFT order) and normalised so that

    f(θ) = Σ_k ĉ(k) exp(i k·θ)

i.e. ĉ = fft2(f) / n².
"""
import logging
import os
from functools import lru_cache
from typing import Tuple

import numpy as np
import scipy.fft as sci_fft

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
TORUS_AREA = 4.0 * np.pi ** 2  # N = ∫ dθ over [0, 2π)²

THREADS_ENV = "QGS_THREADS"


def worker_count() -> int:
    """Worker threads allowed by QGS_THREADS (defaults to the CPU count)."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning("Ignoring non-integer %s=%r", THREADS_ENV, raw)
    return os.cpu_count() or 1


def forward(values: np.ndarray) -> np.ndarray:
    """Grid values → normalised spectrum."""
    n = values.shape[0]
    return sci_fft.fft2(values, workers=worker_count()) / (n * n)


def inverse(coeffs: np.ndarray) -> np.ndarray:
    """Normalised spectrum → real grid values."""
    n = coeffs.shape[0]
    return np.real(sci_fft.ifft2(coeffs * (n * n), workers=worker_count()))


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@lru_cache(maxsize=None)
def wavenumbers(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Integer wavenumber grids (K1, K2) in FFT order."""
    k = np.fft.fftfreq(n, d=1.0 / n)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    return _frozen(k1), _frozen(k2)


@lru_cache(maxsize=None)
def derivative_wavenumbers(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Wavenumbers for odd derivatives: the Nyquist row/column is zeroed."""
    k1, k2 = (w.copy() for w in wavenumbers(n))
    if n % 2 == 0:
        k1[n // 2, :] = 0.0
        k2[:, n // 2] = 0.0
    return _frozen(k1), _frozen(k2)


@lru_cache(maxsize=None)
def wavenumber_squared(n: int) -> np.ndarray:
    """|k|² = k1² + k2² on the derivative wavenumbers."""
    k1, k2 = derivative_wavenumbers(n)
    return _frozen(k1 ** 2 + k2 ** 2)


@lru_cache(maxsize=None)
def inverse_wavenumber_squared(n: int) -> np.ndarray:
    """1/|k|² with zero wherever |k|² = 0 (mean and Nyquist modes)."""
    ksq = wavenumber_squared(n)
    inv = np.zeros_like(ksq)
    np.divide(1.0, ksq, out=inv, where=ksq > 0)
    return _frozen(inv)


@lru_cache(maxsize=None)
def dealias_mask(n: int) -> np.ndarray:
    """2/3 rule: keep modes with max(|k1|, |k2|) ≤ n/3."""
    k1, k2 = wavenumbers(n)
    return _frozen((3 * np.maximum(np.abs(k1), np.abs(k2)) <= n).astype(float))


@lru_cache(maxsize=None)
def grid_points(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Collocation points θ1, θ2 (each (n, n))."""
    theta = TWO_PI * np.arange(n) / n
    t1, t2 = np.meshgrid(theta, theta, indexing="ij")
    return _frozen(t1), _frozen(t2)


def cell_area(n: int) -> float:
    """Quadrature weight of one collocation cell."""
    return (TWO_PI / n) ** 2
