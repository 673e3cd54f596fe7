"""
Data models for the deterministic QGS solver.

Matches the [grid]/[time]/[physics] sections of an experiment config.
"""
from dataclasses import dataclass, asdict
from enum import Enum
from typing import Dict, Any, Optional

from .fields import SpectralScalarField


class SigmaMode(Enum):
    """How the zeroth-order (Rayleigh) drag enters the vorticity equation"""
    NONE = "none"
    CONSTANT = "constant"    # σ·q with configured σ
    SPECTRAL = "spectral"    # −½D(k)·q̂, the exact finite-basis drag of the Kolmogorov noise


@dataclass(frozen=True)
class SolverConfig:
    """
    Parameters of ∂_t q = −{ψ, q} − a·beta·∂₁ψ + νΔq − σ_op q.

    a stays constant along the flow; steps·dt is the integration horizon.
    """
    n: int
    dt: float
    steps: int = 0
    beta: float = 0.0
    a: float = 1.0
    nu: float = 0.0
    sigma_mode: SigmaMode = SigmaMode.NONE
    sigma: float = 0.0
    m: int = 1       # basis cutoff for sigma_mode=spectral
    r: float = 3.0   # decay exponent for sigma_mode=spectral
    dealias: bool = True

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ValueError(f"Grid size must be even and >= 8, got n={self.n}")
        if not self.dt > 0:
            raise ValueError(f"Time step must be positive, got dt={self.dt}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if self.nu < 0:
            raise ValueError(f"Viscosity must be >= 0, got nu={self.nu}")

    @property
    def tau(self) -> float:
        return self.steps * self.dt

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['sigma_mode'] = self.sigma_mode.value
        return data


@dataclass(frozen=True, eq=False)
class SolverState:
    """Solution at time t with its diagnostics (energy ½⟪u,u⟫, enstrophy ½∫q²)"""
    t: float
    psi: SpectralScalarField
    energy: float = 0.0
    enstrophy: float = 0.0
    max_vorticity: Optional[float] = None

    def diagnostics_row(self) -> Dict[str, float]:
        """Row of the diagnostics CSV"""
        return {
            't': self.t,
            'energy': self.energy,
            'enstrophy': self.enstrophy,
            'max_vorticity': self.max_vorticity if self.max_vorticity is not None else float('nan'),
        }
