"""Data model of the extended Lie algebra ĝ = g ⋊_ω ℝ"""
from dataclasses import dataclass
from enum import Enum

from .fields import VelocityField, WaveIndex
from ..utils.spectral_grid import TORUS_AREA


class BasisKind(Enum):
    """Kolmogorov basis families"""
    A = "A"   # A_k = −λ ∇⊥ sin(k·θ)
    B = "B"   # B_k =  λ ∇⊥ cos(k·θ)


@dataclass(frozen=True)
class BasisFieldSpec:
    """
    One Kolmogorov basis direction.

    λ(|k|) = (|k1| + |k2|)^(−r); r ≥ 3 in the reference construction.
    """
    kind: BasisKind
    k: WaveIndex
    r: float = 3.0

    @property
    def amplitude(self) -> float:
        """λ evaluated on the ℓ¹ norm of k"""
        if self.k.is_zero:
            raise ValueError("Basis fields are undefined for k = (0, 0)")
        return float(self.k.l1_norm) ** (-self.r)

    @property
    def label(self) -> str:
        return f"{self.kind.value}{self.k}"


@dataclass(frozen=True)
class CocycleParams:
    """
    Roger cocycle ω_α for the closed 1-form α = beta·θ₂.

    ω_α(X_f, X_g) = ∫ f α(X_g) dθ.
    """
    beta: float = 1.0
    area: float = TORUS_AREA


@dataclass(frozen=True, eq=False)
class ExtendedElement:
    """
    Element (u, a) of ĝ: velocity field plus central coordinate.

    ⟪(X, a), (Y, b)⟫ = ⟪X, Y⟫ + a·b.
    """
    u: VelocityField
    a: float = 0.0

    @classmethod
    def zeros(cls, n: int) -> 'ExtendedElement':
        return cls(VelocityField.zeros(n), 0.0)

    @property
    def n(self) -> int:
        return self.u.n

    def __add__(self, other: 'ExtendedElement') -> 'ExtendedElement':
        if not isinstance(other, ExtendedElement):
            return NotImplemented
        return ExtendedElement(self.u + other.u, self.a + other.a)

    def __sub__(self, other: 'ExtendedElement') -> 'ExtendedElement':
        if not isinstance(other, ExtendedElement):
            return NotImplemented
        return ExtendedElement(self.u - other.u, self.a - other.a)

    def __mul__(self, scalar: float) -> 'ExtendedElement':
        return ExtendedElement(self.u * scalar, self.a * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> 'ExtendedElement':
        return self * -1.0
