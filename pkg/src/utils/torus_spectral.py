"""
Exact spectral operators on T² = [0, 2π)².

Linear operators act as Fourier multipliers. Nonlinear products are formed
on the collocation grid and truncated by the 2/3 rule, so products of fields
inside the dealiased band are computed without aliasing.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from ..models.fields import SpectralScalarField, VelocityField
from . import spectral_grid
from .spectral_grid import TORUS_AREA

logger = logging.getLogger(__name__)


def _require_same_resolution(*fields) -> int:
    sizes = {f.n for f in fields}
    if len(sizes) != 1:
        raise ValueError(f"Resolution mismatch: {sorted(sizes)}")
    return sizes.pop()


# ==================== SCALAR OPERATORS ====================

def partial_derivative(f: SpectralScalarField, axis: int) -> SpectralScalarField:
    """∂₁ (axis=0) or ∂₂ (axis=1)."""
    k = spectral_grid.derivative_wavenumbers(f.n)[axis]
    return SpectralScalarField(f.n, 1j * k * f.coeffs)


def laplacian(psi: SpectralScalarField) -> SpectralScalarField:
    """Multiplier −|k|²."""
    return SpectralScalarField(psi.n, -spectral_grid.wavenumber_squared(psi.n) * psi.coeffs)


def inv_laplacian(q: SpectralScalarField, tol: float = 1e-12) -> SpectralScalarField:
    """
    Multiplier −1/|k|² (zero mode → 0).

    Raises:
        ValueError: if q has a nonzero mean (Δ is not invertible there)
    """
    scale = max(1.0, float(np.max(np.abs(q.coeffs))))
    if abs(q.coeffs[0, 0]) > tol * scale:
        raise ValueError(f"inv_laplacian needs a zero-mean field, mean={q.mean!r}")
    return SpectralScalarField(q.n, -spectral_grid.inverse_wavenumber_squared(q.n) * q.coeffs)


def dealias(f: SpectralScalarField) -> SpectralScalarField:
    return SpectralScalarField(f.n, f.coeffs * spectral_grid.dealias_mask(f.n))


def poisson_bracket(f: SpectralScalarField, g: SpectralScalarField,
                    dealiased: bool = True) -> SpectralScalarField:
    """{f, g} = ∂₁f ∂₂g − ∂₂f ∂₁g, pseudo-spectral; 2/3-truncated unless dealiased=False."""
    n = _require_same_resolution(f, g)
    k1, k2 = spectral_grid.derivative_wavenumbers(n)
    f1 = spectral_grid.inverse(1j * k1 * f.coeffs)
    f2 = spectral_grid.inverse(1j * k2 * f.coeffs)
    g1 = spectral_grid.inverse(1j * k1 * g.coeffs)
    g2 = spectral_grid.inverse(1j * k2 * g.coeffs)
    product = spectral_grid.forward(f1 * g2 - f2 * g1)
    if dealiased:
        product = product * spectral_grid.dealias_mask(n)
    return SpectralScalarField(n, product)


def scalar_inner(f: SpectralScalarField, g: SpectralScalarField) -> float:
    """∫ f g dθ via Parseval."""
    _require_same_resolution(f, g)
    return float(TORUS_AREA * np.real(np.sum(f.coeffs * np.conj(g.coeffs))))


def scalar_norm(f: SpectralScalarField) -> float:
    return float(np.sqrt(max(scalar_inner(f, f), 0.0)))


# ==================== VECTOR OPERATORS ====================

def grad_perp(psi: SpectralScalarField) -> VelocityField:
    """u = ∇⊥ψ = (−∂₂ψ, ∂₁ψ); the mean of ψ is dropped, harmonic part is zero."""
    return VelocityField(psi)


def divergence(u: VelocityField) -> SpectralScalarField:
    """Spectral divergence (identically zero for fields built here)."""
    k1, k2 = spectral_grid.derivative_wavenumbers(u.n)
    spectra = u.spectra()
    return SpectralScalarField(u.n, 1j * k1 * spectra[0] + 1j * k2 * spectra[1])


def vorticity(u: VelocityField) -> SpectralScalarField:
    """q = ∂₁u₂ − ∂₂u₁ = Δψ."""
    return laplacian(u.stream)


def leray_project_spectra(spectra: np.ndarray) -> VelocityField:
    """
    Hodge projection of a vector field given by its component spectra (2, n, n).

    Per mode k ≠ 0: v̂ ↦ v̂ − k(k·v̂)/|k|², repackaged as stream function
    φ̂ = −i(k1 v̂₂ − k2 v̂₁)/|k|²; the k = 0 mode becomes the harmonic part.
    """
    n = spectra.shape[-1]
    k1, k2 = spectral_grid.derivative_wavenumbers(n)
    inv_ksq = spectral_grid.inverse_wavenumber_squared(n)
    stream = -1j * (k1 * spectra[1] - k2 * spectra[0]) * inv_ksq
    harmonic = (float(spectra[0, 0, 0].real), float(spectra[1, 0, 0].real))
    return VelocityField(SpectralScalarField(n, stream), harmonic)


def leray_project(v1: np.ndarray, v2: np.ndarray) -> VelocityField:
    """Divergence-free part of the raw grid field (v1, v2)."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    if v1.shape != v2.shape or v1.ndim != 2 or v1.shape[0] != v1.shape[1]:
        raise ValueError(f"Components must be square grids of equal shape, got {v1.shape} and {v2.shape}")
    return leray_project_spectra(np.stack([spectral_grid.forward(v1), spectral_grid.forward(v2)]))


def l2_inner(u: VelocityField, v: VelocityField) -> float:
    """
    ∫ ⟨u, v⟩ dθ, exact via Parseval:
    N·Σ |k|² ψ̂_u(k) conj ψ̂_v(k) + N·(c_u · c_v).
    """
    n = _require_same_resolution(u, v)
    ksq = spectral_grid.wavenumber_squared(n)
    streams = np.real(np.sum(ksq * u.stream.coeffs * np.conj(v.stream.coeffs)))
    harmonics = u.harmonic[0] * v.harmonic[0] + u.harmonic[1] * v.harmonic[1]
    return float(TORUS_AREA * (streams + harmonics))


def l2_norm(u: VelocityField) -> float:
    return float(np.sqrt(max(l2_inner(u, u), 0.0)))


def gradient_grids(spectrum: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(∂₁f, ∂₂f) on the grid from a scalar spectrum."""
    n = spectrum.shape[-1]
    k1, k2 = spectral_grid.derivative_wavenumbers(n)
    return spectral_grid.inverse(1j * k1 * spectrum), spectral_grid.inverse(1j * k2 * spectrum)


def directional_derivative(x_grids: Tuple[np.ndarray, np.ndarray], spectrum: np.ndarray) -> np.ndarray:
    """Spectrum of (X·∇)f, dealiased; X given on the grid."""
    n = spectrum.shape[-1]
    d1, d2 = gradient_grids(spectrum)
    return spectral_grid.forward(x_grids[0] * d1 + x_grids[1] * d2) * spectral_grid.dealias_mask(n)


def advection_spectra(x: VelocityField, y_spectra: np.ndarray) -> np.ndarray:
    """Component spectra (2, n, n) of (X·∇)Y, dealiased."""
    x_grids = x.components()
    return np.stack([directional_derivative(x_grids, y_spectra[0]),
                     directional_derivative(x_grids, y_spectra[1])])


def pressure(u: VelocityField) -> SpectralScalarField:
    """
    Diagnostic pressure solving Δp = −div((u·∇)u).

    Only used for output: the projected formulation never needs it.
    """
    n = u.n
    k1, k2 = spectral_grid.derivative_wavenumbers(n)
    adv = advection_spectra(u, u.spectra())
    div = 1j * k1 * adv[0] + 1j * k2 * adv[1]
    return SpectralScalarField(n, div * spectral_grid.inverse_wavenumber_squared(n))


# ==================== TEST FIELDS ====================

def random_band_limited(n: int, kmax: int, rng: np.random.Generator,
                        amplitude: float = 1.0, zero_mean: bool = True) -> SpectralScalarField:
    """
    Real random field with modes max(|k1|, |k2|) ≤ kmax.

    Args:
        n: grid resolution (kmax must stay below n/3)
        kmax: band limit
        rng: numpy Generator
        amplitude: scale of each coefficient
        zero_mean: drop the k = 0 coefficient
    """
    if 3 * kmax > n:
        raise ValueError(f"kmax={kmax} is outside the dealiased band of n={n}")
    k1, k2 = spectral_grid.wavenumbers(n)
    band = (np.abs(k1) <= kmax) & (np.abs(k2) <= kmax)
    raw = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    raw = np.where(band, raw, 0.0)
    # Hermitian symmetrisation: ĉ(−k) = conj ĉ(k)
    mirrored = np.roll(np.flip(raw, axis=(0, 1)), 1, axis=(0, 1))
    coeffs = 0.5 * amplitude * (raw + np.conj(mirrored))
    if zero_mean:
        coeffs[0, 0] = 0.0
    return SpectralScalarField(n, coeffs)


def random_velocity(n: int, kmax: int, rng: np.random.Generator, amplitude: float = 1.0,
                    harmonic: Optional[Tuple[float, float]] = None) -> VelocityField:
    """∇⊥ of a random band-limited stream function, optional harmonic part."""
    return VelocityField(random_band_limited(n, kmax, rng, amplitude), harmonic or (0.0, 0.0))
