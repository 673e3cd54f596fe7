"""Closed 1-forms on T² and integrability check records"""
from dataclasses import dataclass, asdict
from typing import Dict, Any, Optional

import numpy as np

from .fields import SpectralScalarField
from ..utils import spectral_grid


@dataclass(frozen=True, eq=False)
class OneForm:
    """
    γ = (f + c1)·θ₁ + (g + c2)·θ₂.

    f and g may carry a mean; c1 and c2 hold constant parts given separately.
    """
    f: SpectralScalarField
    g: SpectralScalarField
    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        if self.f.n != self.g.n:
            raise ValueError(f"Resolution mismatch: {self.f.n} vs {self.g.n}")

    @property
    def n(self) -> int:
        return self.f.n

    @classmethod
    def constant(cls, c1: float, c2: float, n: int) -> 'OneForm':
        """c1·θ₁ + c2·θ₂"""
        zero = SpectralScalarField.zeros(n)
        return cls(zero, zero, float(c1), float(c2))

    @classmethod
    def exact(cls, phi: SpectralScalarField) -> 'OneForm':
        """dφ = ∂₁φ·θ₁ + ∂₂φ·θ₂"""
        k1, k2 = spectral_grid.derivative_wavenumbers(phi.n)
        return cls(SpectralScalarField(phi.n, 1j * k1 * phi.coeffs),
                   SpectralScalarField(phi.n, 1j * k2 * phi.coeffs))

    @classmethod
    def from_functions(cls, n: int, f, g=None) -> 'OneForm':
        """Sample coefficient functions f(θ1, θ2), g(θ1, θ2) on the grid."""
        f_field = SpectralScalarField.from_function(n, f)
        g_field = SpectralScalarField.from_function(n, g) if g is not None else SpectralScalarField.zeros(n)
        return cls(f_field, g_field)

    def __add__(self, other: 'OneForm') -> 'OneForm':
        if not isinstance(other, OneForm):
            return NotImplemented
        return OneForm(self.f + other.f, self.g + other.g, self.c1 + other.c1, self.c2 + other.c2)


@dataclass
class CohomologyCheck:
    """Outcome of the integral criterion ∫_N γ = ∫ α∧γ for one form"""
    gamma_id: str
    closed_residual: float
    line_integral: Optional[float] = None
    wedge_integral: Optional[float] = None
    abs_diff: Optional[float] = None
    s_deviation: Optional[float] = None
    passed: bool = False
    rejected: bool = False

    def to_dict(self) -> Dict[str, Any]:
        """JSON-lines record; `passed` is written as `pass`"""
        data = asdict(self)
        data['pass'] = data.pop('passed')
        for key, value in data.items():
            if isinstance(value, (np.floating, np.bool_)):
                data[key] = value.item()
        return data
