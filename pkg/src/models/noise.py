"""
Noise models and particle data for the stochastic flow.

Two noise families drive the particles:

- KolmogorovBasis(m, r)   - the fields A_k, B_k over the half-lattice |k|₁ ≤ m
- TwoConstantFields(nu)   - H₁ = (√(2ν), 0), H₂ = (0, √(2ν))

Every noise field is geodesic (∇_H H = 0), so Itô and Stratonovich drifts agree.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .fields import VelocityField, WaveIndex


class NoiseModel(ABC):
    """Finite family of divergence-free noise directions H_i"""

    @abstractmethod
    def dimension(self) -> int:
        """Number of independent Wiener processes"""
        pass

    @abstractmethod
    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """
        Noise fields at scattered points.

        Args:
            points: positions, shape (P, 2)

        Returns:
            Array of shape (P, dimension, 2)
        """
        pass

    @abstractmethod
    def vector_fields(self, n: int) -> Tuple[VelocityField, ...]:
        """Spectral representation of every H_i on an n×n grid"""
        pass

    @abstractmethod
    def diffusion_coefficient(self) -> float:
        """ν in Σ (H_i·∇)²f = 2νΔf"""
        pass

    @abstractmethod
    def get_name(self) -> str:
        pass


@dataclass(frozen=True)
class KolmogorovBasis(NoiseModel):
    """A_k = λ k⊥ cos(k·θ), B_k = λ k⊥ sin(k·θ) with k⊥ = (k2, −k1), λ = |k|₁^(−r)"""
    m: int = 1
    r: float = 3.0

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"Basis cutoff must be >= 0, got m={self.m}")

    def wave_indices(self) -> List[WaveIndex]:
        from ..utils.central_extension import half_lattice
        return half_lattice(self.m)

    def dimension(self) -> int:
        return 2 * len(self.wave_indices())

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        waves = self.wave_indices()
        out = np.empty((points.shape[0], 2 * len(waves), 2))
        for j, k in enumerate(waves):
            lam = float(k.l1_norm) ** (-self.r)
            phase = k.k1 * points[:, 0] + k.k2 * points[:, 1]
            c, s = np.cos(phase), np.sin(phase)
            out[:, 2 * j, 0] = lam * k.k2 * c
            out[:, 2 * j, 1] = -lam * k.k1 * c
            out[:, 2 * j + 1, 0] = lam * k.k2 * s
            out[:, 2 * j + 1, 1] = -lam * k.k1 * s
        return out

    def vector_fields(self, n: int) -> Tuple[VelocityField, ...]:
        from ..utils.central_extension import kolmogorov_basis
        return tuple(field for _, field in kolmogorov_basis(self.m, self.r, n))

    def diffusion_coefficient(self) -> float:
        from ..utils.central_extension import viscosity_coefficient
        return viscosity_coefficient(self.m, self.r)

    def get_name(self) -> str:
        return f"kolmogorov(m={self.m}, r={self.r:g})"


@dataclass(frozen=True)
class TwoConstantFields(NoiseModel):
    """Constant noise directions: plain Brownian motion with variance 2νt per component"""
    nu: float = 0.0

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError(f"Viscosity must be >= 0, got nu={self.nu}")

    @property
    def amplitude(self) -> float:
        return float(np.sqrt(2.0 * self.nu))

    def dimension(self) -> int:
        return 2

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros((points.shape[0], 2, 2))
        out[:, 0, 0] = self.amplitude
        out[:, 1, 1] = self.amplitude
        return out

    def vector_fields(self, n: int) -> Tuple[VelocityField, ...]:
        return (VelocityField.constant(n, self.amplitude, 0.0),
                VelocityField.constant(n, 0.0, self.amplitude))

    def diffusion_coefficient(self) -> float:
        return self.nu

    def get_name(self) -> str:
        return f"two_field(nu={self.nu:g})"


@dataclass
class ParticleEnsemble:
    """
    Particles (θ₁, θ₂) in [0, 2π)² with a lifted central phase c.

    The noise of particle p at step s depends only on (master_seed, s, p).
    """
    positions: np.ndarray
    master_seed: int = 0
    central_phase: Optional[np.ndarray] = None

    def __post_init__(self):
        self.positions = np.mod(np.atleast_2d(np.asarray(self.positions, dtype=float)), 2.0 * np.pi)
        if self.positions.shape[1] != 2:
            raise ValueError(f"Positions must have shape (P, 2), got {self.positions.shape}")
        if self.central_phase is None:
            self.central_phase = np.zeros(self.positions.shape[0])
        else:
            self.central_phase = np.asarray(self.central_phase, dtype=float)

    @property
    def n_particles(self) -> int:
        return self.positions.shape[0]


@dataclass
class PathData:
    """
    Recorded particle paths.

    positions are wrapped into [0, 2π)²; displacement is the unwrapped
    offset from the start; phase is the lifted central coordinate.
    """
    times: np.ndarray          # (R,)
    positions: np.ndarray      # (R, P, 2)
    displacement: np.ndarray   # (R, P, 2)
    phase: np.ndarray          # (R, P)
    dt: float = 0.0
    scheme: str = "heun"

    @property
    def n_records(self) -> int:
        return self.times.shape[0]

    @property
    def n_particles(self) -> int:
        return self.positions.shape[1]

    def index_of(self, t: float) -> int:
        """Record index closest to time t"""
        return int(np.argmin(np.abs(self.times - t)))


@dataclass
class DriftEstimate:
    """
    Binned conditional-expectation estimate of the drift at one time.

    Bins with no particles are NaN in mean/stderr and True in `missing`.
    """
    t: float
    epsilon: float
    centers: np.ndarray     # (bins, bins, 2)
    counts: np.ndarray      # (bins, bins)
    mean: np.ndarray        # (bins, bins, 2)
    stderr: np.ndarray      # (bins, bins, 2)
    reference: Optional[np.ndarray] = None   # bin-averaged true drift, (bins, bins, 2)

    @property
    def missing(self) -> np.ndarray:
        return self.counts == 0

    def z_scores(self) -> np.ndarray:
        """(mean − reference)/stderr per bin and component (NaN where undefined)"""
        if self.reference is None:
            raise ValueError("No reference drift attached to this estimate")
        with np.errstate(divide='ignore', invalid='ignore'):
            return (self.mean - self.reference) / self.stderr

    def fraction_within(self, k: float = 3.0) -> float:
        """Share of populated bin components within k standard errors of the reference"""
        z = self.z_scores()
        valid = np.isfinite(z)
        if not np.any(valid):
            return float('nan')
        return float(np.mean(np.abs(z[valid]) <= k))
