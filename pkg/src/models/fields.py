"""
Spectral field models on the flat torus T² = [0, 2π)².

Pure data containers (no operators beyond arithmetic and evaluation):

- WaveIndex            - a lattice point k = (k1, k2)
- SpectralScalarField  - truncated Fourier coefficients of a real scalar
- VelocityField        - ∇⊥ψ + constant harmonic part (c1, c2)

Differential operators live in src.utils.torus_spectral.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..utils import spectral_grid

# Points per chunk when summing active modes at scattered positions
_EVAL_CHUNK = 8192
# Modes below this fraction of the largest coefficient are round-off
_EVAL_REL_TOL = 1e-14


@dataclass(frozen=True)
class WaveIndex:
    """
    Lattice point of Z².

    Both norms are exposed: Laplacian multipliers use |k|² = k1² + k2²,
    while the noise amplitude λ takes the ℓ¹ norm |k1| + |k2|.
    """
    k1: int
    k2: int

    @property
    def norm_sq(self) -> int:
        return self.k1 * self.k1 + self.k2 * self.k2

    @property
    def l1_norm(self) -> int:
        return abs(self.k1) + abs(self.k2)

    @property
    def is_zero(self) -> bool:
        return self.k1 == 0 and self.k2 == 0

    def __neg__(self) -> 'WaveIndex':
        return WaveIndex(-self.k1, -self.k2)

    def __str__(self) -> str:
        return f"({self.k1},{self.k2})"


@dataclass(frozen=True, eq=False)
class SpectralScalarField:
    """
    Real scalar field on an n×n grid held as normalised Fourier coefficients.

    coeffs[i, j] is ĉ(k) for k = (fftfreq(n)[i]·n, fftfreq(n)[j]·n) and the
    field is f(θ) = Σ ĉ(k) exp(i k·θ). The array is read-only.
    """
    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex)
        if coeffs.shape != (self.n, self.n):
            raise ValueError(f"Expected coefficients of shape {(self.n, self.n)}, got {coeffs.shape}")
        coeffs.setflags(write=False)
        object.__setattr__(self, 'coeffs', coeffs)

    # ==================== CONSTRUCTION ====================

    @classmethod
    def from_grid(cls, values: np.ndarray) -> 'SpectralScalarField':
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"Grid values must be square, got shape {values.shape}")
        return cls(values.shape[0], spectral_grid.forward(values))

    @classmethod
    def zeros(cls, n: int) -> 'SpectralScalarField':
        return cls(n, np.zeros((n, n), dtype=complex))

    @classmethod
    def from_function(cls, n: int, func) -> 'SpectralScalarField':
        """Sample func(θ1, θ2) on the collocation grid."""
        t1, t2 = spectral_grid.grid_points(n)
        return cls.from_grid(func(t1, t2))

    # ==================== ACCESS ====================

    @property
    def mean(self) -> float:
        """k = 0 coefficient (the spatial average)"""
        return float(self.coeffs[0, 0].real)

    def coeff(self, k1: int, k2: int) -> complex:
        return complex(self.coeffs[k1 % self.n, k2 % self.n])

    def to_grid(self) -> np.ndarray:
        return spectral_grid.inverse(self.coeffs)

    def without_mean(self) -> 'SpectralScalarField':
        if self.coeffs[0, 0] == 0:
            return self
        coeffs = self.coeffs.copy()
        coeffs[0, 0] = 0.0
        return SpectralScalarField(self.n, coeffs)

    def hermitian_defect(self) -> float:
        """max |ĉ(−k) − conj ĉ(k)| (zero for real fields)"""
        mirrored = np.roll(np.flip(self.coeffs, axis=(0, 1)), 1, axis=(0, 1))
        return float(np.max(np.abs(mirrored - np.conj(self.coeffs))))

    def active_modes(self, rel_tol: float = 0.0):
        """Wave numbers and coefficients of the nonzero modes."""
        k1, k2 = spectral_grid.wavenumbers(self.n)
        magnitude = np.abs(self.coeffs)
        threshold = rel_tol * magnitude.max() if magnitude.size else 0.0
        mask = magnitude > threshold
        return k1[mask], k2[mask], self.coeffs[mask]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Exact trigonometric interpolation at scattered points (P, 2)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        k1, k2, c = self.active_modes(_EVAL_REL_TOL)
        out = np.empty(points.shape[0])
        for start in range(0, points.shape[0], _EVAL_CHUNK):
            chunk = points[start:start + _EVAL_CHUNK]
            phase = np.outer(chunk[:, 0], k1) + np.outer(chunk[:, 1], k2)
            out[start:start + _EVAL_CHUNK] = np.real(np.exp(1j * phase) @ c)
        return out

    # ==================== ARITHMETIC ====================

    def _check_partner(self, other: 'SpectralScalarField'):
        if not isinstance(other, SpectralScalarField):
            return NotImplemented
        if other.n != self.n:
            raise ValueError(f"Resolution mismatch: {self.n} vs {other.n}")
        return None

    def __add__(self, other: 'SpectralScalarField') -> 'SpectralScalarField':
        if self._check_partner(other) is NotImplemented:
            return NotImplemented
        return SpectralScalarField(self.n, self.coeffs + other.coeffs)

    def __sub__(self, other: 'SpectralScalarField') -> 'SpectralScalarField':
        if self._check_partner(other) is NotImplemented:
            return NotImplemented
        return SpectralScalarField(self.n, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> 'SpectralScalarField':
        return SpectralScalarField(self.n, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> 'SpectralScalarField':
        return SpectralScalarField(self.n, -self.coeffs)

    def __repr__(self) -> str:
        k1, _, _ = self.active_modes()
        return f"SpectralScalarField(n={self.n}, active_modes={k1.size}, mean={self.mean:.3g})"


@dataclass(frozen=True, eq=False)
class VelocityField:
    """
    Divergence-free field u = ∇⊥ψ + (c1, c2) with ∇⊥f = (−∂₂f, ∂₁f).

    The stream function is kept zero-mean; the constant part lives in
    `harmonic`. ∫ u dθ = N·(c1, c2).
    """
    stream: SpectralScalarField
    harmonic: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, 'stream', self.stream.without_mean())
        c1, c2 = self.harmonic
        object.__setattr__(self, 'harmonic', (float(c1), float(c2)))

    @classmethod
    def zeros(cls, n: int) -> 'VelocityField':
        return cls(SpectralScalarField.zeros(n))

    @classmethod
    def constant(cls, n: int, c1: float, c2: float) -> 'VelocityField':
        return cls(SpectralScalarField.zeros(n), (c1, c2))

    @property
    def n(self) -> int:
        return self.stream.n

    def spectra(self) -> np.ndarray:
        """Component spectra (2, n, n): û1 = −i k2 ψ̂, û2 = i k1 ψ̂, harmonic at k = 0."""
        k1, k2 = spectral_grid.derivative_wavenumbers(self.n)
        psi = self.stream.coeffs
        out = np.empty((2, self.n, self.n), dtype=complex)
        out[0] = -1j * k2 * psi
        out[1] = 1j * k1 * psi
        out[0, 0, 0] = self.harmonic[0]
        out[1, 0, 0] = self.harmonic[1]
        return out

    def components(self) -> Tuple[np.ndarray, np.ndarray]:
        """Grid values (u1, u2)."""
        spectra = self.spectra()
        return spectral_grid.inverse(spectra[0]), spectral_grid.inverse(spectra[1])

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Velocity at scattered points, shape (P, 2)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        k1, k2, c = self.stream.active_modes(_EVAL_REL_TOL)
        out = np.empty((points.shape[0], 2))
        for start in range(0, points.shape[0], _EVAL_CHUNK):
            chunk = points[start:start + _EVAL_CHUNK]
            waves = np.exp(1j * (np.outer(chunk[:, 0], k1) + np.outer(chunk[:, 1], k2)))
            out[start:start + _EVAL_CHUNK, 0] = np.real(waves @ (-1j * k2 * c))
            out[start:start + _EVAL_CHUNK, 1] = np.real(waves @ (1j * k1 * c))
        out[:, 0] += self.harmonic[0]
        out[:, 1] += self.harmonic[1]
        return out

    def max_speed(self) -> float:
        u1, u2 = self.components()
        return float(np.sqrt(np.max(u1 ** 2 + u2 ** 2)))

    # ==================== ARITHMETIC ====================

    def __add__(self, other: 'VelocityField') -> 'VelocityField':
        if not isinstance(other, VelocityField):
            return NotImplemented
        return VelocityField(self.stream + other.stream,
                             (self.harmonic[0] + other.harmonic[0],
                              self.harmonic[1] + other.harmonic[1]))

    def __sub__(self, other: 'VelocityField') -> 'VelocityField':
        if not isinstance(other, VelocityField):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar: float) -> 'VelocityField':
        return VelocityField(self.stream * scalar,
                             (self.harmonic[0] * scalar, self.harmonic[1] * scalar))

    __rmul__ = __mul__

    def __neg__(self) -> 'VelocityField':
        return self * -1.0

    def __repr__(self) -> str:
        return f"VelocityField(n={self.n}, stream={self.stream!r}, harmonic={self.harmonic})"
