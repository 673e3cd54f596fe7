"""
The extended Lie algebra ĝ = g ⋊_ω ℝ on the flat torus.

Conventions:

- α = beta·θ₂ (CocycleParams.beta is the literal θ₂ coefficient)
- ω(X_f, X_g) = ∫ f α(X_g) dθ = beta ∫ f ∂₁g dθ; harmonic parts contribute zero
- [u, v] = P((u·∇)v − (v·∇)u) and ad_u v = −[u, v] (right-invariant metric)
- ad*_X Y = P((X·∇)Y + (∇X)ᵀY), ∇_X Y = P((X·∇)Y)

Sums over noise directions run over the half-lattice k1 > 0, or k1 = 0 and
k2 > 0, with |k|₁ ≤ m. A_{−k} = −A_k and B_{−k} = B_k, so each direction
appears once.
"""
import logging
from functools import lru_cache
from typing import Iterable, List, Tuple

import numpy as np

from ..models.extension import BasisFieldSpec, BasisKind, CocycleParams, ExtendedElement
from ..models.fields import SpectralScalarField, VelocityField, WaveIndex
from . import spectral_grid
from .torus_spectral import (
    advection_spectra,
    directional_derivative,
    gradient_grids,
    l2_inner,
    l2_norm,
    laplacian,
    leray_project_spectra,
)

logger = logging.getLogger(__name__)

GEODESIC_TOL = 1e-10


# ==================== KOLMOGOROV BASIS ====================

def half_lattice(m: int) -> List[WaveIndex]:
    """k1 > 0, or k1 = 0 and k2 > 0, with |k1| + |k2| ≤ m; sorted by (|k|₁, k1, k2)."""
    out = []
    for k1 in range(0, m + 1):
        for k2 in range(-m, m + 1):
            if abs(k1) + abs(k2) > m:
                continue
            if k1 > 0 or (k1 == 0 and k2 > 0):
                out.append(WaveIndex(k1, k2))
    out.sort(key=lambda k: (k.l1_norm, k.k1, k.k2))
    return out


def basis_field(spec: BasisFieldSpec, n: int) -> VelocityField:
    """
    A_k = −λ∇⊥sin(k·θ) or B_k = λ∇⊥cos(k·θ) on an n×n grid.

    Raises:
        ValueError: for k = 0 or k at/above the Nyquist frequency
    """
    k = spec.k
    if k.is_zero:
        raise ValueError("Basis fields are undefined for k = (0, 0)")
    if 2 * max(abs(k.k1), abs(k.k2)) >= n:
        raise ValueError(f"Wave index {k} not resolved on an n={n} grid")
    lam = spec.amplitude
    coeffs = np.zeros((n, n), dtype=complex)
    if spec.kind is BasisKind.A:
        # −λ sin(x) = −λ (e^{ix} − e^{−ix}) / 2i
        coeffs[k.k1 % n, k.k2 % n] = 0.5j * lam
        coeffs[-k.k1 % n, -k.k2 % n] = -0.5j * lam
    else:
        coeffs[k.k1 % n, k.k2 % n] = 0.5 * lam
        coeffs[-k.k1 % n, -k.k2 % n] = 0.5 * lam
    return VelocityField(SpectralScalarField(n, coeffs))


@lru_cache(maxsize=32)
def kolmogorov_basis(m: int, r: float, n: int) -> Tuple[Tuple[BasisFieldSpec, VelocityField], ...]:
    """Read-only table of (spec, field) for every A_k, B_k on the half-lattice."""
    table = []
    for k in half_lattice(m):
        for kind in (BasisKind.A, BasisKind.B):
            spec = BasisFieldSpec(kind, k, r)
            table.append((spec, basis_field(spec, n)))
    logger.debug("Built Kolmogorov basis m=%d r=%g n=%d (%d fields)", m, r, n, len(table))
    return tuple(table)


def viscosity_coefficient(m: int, r: float) -> float:
    """ν = ½ Σ_half λ(|k|₁)² k1²."""
    total = 0.0
    for k in half_lattice(m):
        total += float(k.l1_norm) ** (-2.0 * r) * k.k1 * k.k1
    return 0.5 * total


def generator_sum(f: SpectralScalarField, fields: Iterable[VelocityField]) -> SpectralScalarField:
    """Σ_H (H·∇)((H·∇)f), dealiased after each product."""
    total = np.zeros((f.n, f.n), dtype=complex)
    for h in fields:
        grids = h.components()
        once = directional_derivative(grids, f.coeffs)
        total += directional_derivative(grids, once)
    return SpectralScalarField(f.n, total)


# ==================== COCYCLE AND T ====================

def roger_cocycle(u: VelocityField, v: VelocityField, p: CocycleParams,
                  method: str = "spectral") -> float:
    """
    ω_α(u, v) = beta ∫ ψ_u ∂₁ψ_v dθ.

    Args:
        u, v: velocity fields (harmonic parts are ignored)
        p: cocycle parameters
        method: "spectral" (closed-form Parseval sum) or "quadrature" (grid sum)
    """
    if u.n != v.n:
        raise ValueError(f"Resolution mismatch: {u.n} vs {v.n}")
    n = u.n
    if method == "spectral":
        k1, _ = spectral_grid.derivative_wavenumbers(n)
        total = np.sum(u.stream.coeffs * np.conj(1j * k1 * v.stream.coeffs))
        return float(p.area * p.beta * np.real(total))
    if method == "quadrature":
        psi_u = u.stream.to_grid()
        v2 = VelocityField(v.stream).components()[1]
        return float(p.beta * spectral_grid.cell_area(n) * np.sum(psi_u * v2))
    raise ValueError(f"Unknown cocycle method {method!r}")


def t_operator(u: VelocityField, p: CocycleParams) -> VelocityField:
    """
    Metric representative of ω: ⟪Tu, v⟫ = ω(u, v).

    ψ̂_T(k) = −i·beta·k1·ψ̂_u(k)/|k|²; a constant field maps to zero.
    """
    n = u.n
    k1, _ = spectral_grid.derivative_wavenumbers(n)
    coeffs = -1j * p.beta * k1 * u.stream.coeffs * spectral_grid.inverse_wavenumber_squared(n)
    return VelocityField(SpectralScalarField(n, coeffs))


# ==================== BRACKETS AND CONNECTION ====================

def vector_field_bracket(u: VelocityField, v: VelocityField) -> VelocityField:
    """[u, v] = P((u·∇)v − (v·∇)u)."""
    if u.n != v.n:
        raise ValueError(f"Resolution mismatch: {u.n} vs {v.n}")
    return leray_project_spectra(advection_spectra(u, v.spectra()) - advection_spectra(v, u.spectra()))


def _transpose_gradient_spectra(x: VelocityField, y: VelocityField) -> np.ndarray:
    """Spectra of (∇X)ᵀY, i.e. component j = Σ_i Y_i ∂_j X_i."""
    n = x.n
    x_spectra = x.spectra()
    y1, y2 = y.components()
    d1x1, d2x1 = gradient_grids(x_spectra[0])
    d1x2, d2x2 = gradient_grids(x_spectra[1])
    mask = spectral_grid.dealias_mask(n)
    return np.stack([spectral_grid.forward(y1 * d1x1 + y2 * d1x2) * mask,
                     spectral_grid.forward(y1 * d2x1 + y2 * d2x2) * mask])


def ad_star(x: VelocityField, y: VelocityField) -> VelocityField:
    """ad*_X Y = P((X·∇)Y + (∇X)ᵀY), the metric adjoint of Z ↦ −[X, Z]."""
    if x.n != y.n:
        raise ValueError(f"Resolution mismatch: {x.n} vs {y.n}")
    return leray_project_spectra(advection_spectra(x, y.spectra()) + _transpose_gradient_spectra(x, y))


def covariant_derivative(x: VelocityField, y: VelocityField) -> VelocityField:
    """Levi-Civita connection of the L² metric: ∇_X Y = P((X·∇)Y)."""
    if x.n != y.n:
        raise ValueError(f"Resolution mismatch: {x.n} vs {y.n}")
    return leray_project_spectra(advection_spectra(x, y.spectra()))


def second_covariant_derivative(x: VelocityField, u: VelocityField) -> VelocityField:
    """
    ∇_X∇_X u on the flat torus: P((X·∇)((X·∇)u)).

    The inner derivative is left unprojected; curvature vanishes, so this is
    the flat second derivative followed by a single projection.
    """
    first = advection_spectra(x, u.spectra())
    return leray_project_spectra(advection_spectra(x, first))


def is_geodesic(x: VelocityField, tol: float = GEODESIC_TOL) -> bool:
    """∇_X X = 0 within tol (relative to ‖X‖²)."""
    scale = max(1.0, l2_inner(x, x))
    return l2_norm(covariant_derivative(x, x)) <= tol * scale


# ==================== EXTENDED OPERATIONS ====================

def ext_inner(x: ExtendedElement, y: ExtendedElement) -> float:
    """⟪(X, a), (Y, b)⟫ = ⟪X, Y⟫ + a·b"""
    return l2_inner(x.u, y.u) + x.a * y.a


def ext_bracket(x: ExtendedElement, y: ExtendedElement, p: CocycleParams) -> ExtendedElement:
    """[(u, a), (v, b)] = ([u, v], ω(u, v))"""
    return ExtendedElement(vector_field_bracket(x.u, y.u), roger_cocycle(x.u, y.u, p))


def coad(x: ExtendedElement, y: ExtendedElement, p: CocycleParams) -> ExtendedElement:
    """ad*_(X,a)(Y,b) = (ad*_X Y − b·TX, 0)"""
    return ExtendedElement(ad_star(x.u, y.u) - t_operator(x.u, p) * y.a, 0.0)


def ext_covariant_derivative(x: ExtendedElement, y: ExtendedElement, p: CocycleParams) -> ExtendedElement:
    """∇̂_(X,a)(Y,b) = (∇_X Y − ½(b·TX + a·TY), ½ω(X, Y))"""
    u = covariant_derivative(x.u, y.u) - (t_operator(x.u, p) * y.a + t_operator(y.u, p) * x.a) * 0.5
    return ExtendedElement(u, 0.5 * roger_cocycle(x.u, y.u, p))


def correction_khat(u_hat: ExtendedElement, x_hat: ExtendedElement, p: CocycleParams) -> ExtendedElement:
    """
    K̂((u, a), (X, 0)) = ½(∇_X∇_X u + ω(u, X)·TX, 0).

    Raises:
        ValueError: if x_hat has a central part or X is not geodesic
    """
    if x_hat.a != 0.0:
        raise ValueError("Noise direction must have zero central part")
    x = x_hat.u
    if not is_geodesic(x):
        raise ValueError("basis field not geodesic")
    u = u_hat.u
    value = second_covariant_derivative(x, u) + t_operator(x, p) * roger_cocycle(u, x, p)
    return ExtendedElement(value * 0.5, 0.0)


def correction_sum(u_hat: ExtendedElement, fields: Iterable[VelocityField], p: CocycleParams) -> ExtendedElement:
    """Σ_H K̂(û, (H, 0)) over the given noise directions."""
    total = ExtendedElement.zeros(u_hat.n)
    for h in fields:
        total = total + correction_khat(u_hat, ExtendedElement(h, 0.0), p)
    return total


# ==================== DAMPING ====================

def damping_multiplier(k: WaveIndex, r: float, p: CocycleParams) -> float:
    """D(k) = −½·beta²·N·λ(|k|₁)²·k1²/|k|²"""
    if k.is_zero:
        return 0.0
    lam_sq = float(k.l1_norm) ** (-2.0 * r)
    return -0.5 * p.beta ** 2 * p.area * lam_sq * k.k1 ** 2 / k.norm_sq


def damping_multiplier_grid(n: int, m: int, r: float, p: CocycleParams) -> np.ndarray:
    """D(k) on the FFT grid for |k|₁ ≤ m, zero elsewhere."""
    k1, k2 = spectral_grid.wavenumbers(n)
    l1 = np.abs(k1) + np.abs(k2)
    ksq = k1 ** 2 + k2 ** 2
    out = np.zeros((n, n))
    inside = (l1 > 0) & (l1 <= m)
    out[inside] = -0.5 * p.beta ** 2 * p.area * l1[inside] ** (-2.0 * r) * k1[inside] ** 2 / ksq[inside]
    return out


def damping_sum(u: VelocityField, m: int, r: float, p: CocycleParams,
                idealized: bool = False, tol: float = 1e-12) -> VelocityField:
    """
    S(u) = Σ_half ω(u, A_k)·TA_k + ω(u, B_k)·TB_k.

    Fourier-diagonal with multiplier D(k). With idealized=True returns the
    constant-coefficient form −beta²·N·u instead.

    Raises:
        ValueError: if u has stream modes with |k|₁ > m (the sum would be incomplete)
    """
    if idealized:
        return u * (-p.beta ** 2 * p.area)
    n = u.n
    k1, k2 = spectral_grid.wavenumbers(n)
    outside = (np.abs(k1) + np.abs(k2)) > m
    magnitude = np.abs(u.stream.coeffs)
    scale = max(1.0, float(magnitude.max()))
    if np.any(magnitude[outside] > tol * scale):
        raise ValueError(f"Field has modes outside |k|_1 <= {m}: damping sum incomplete")
    coeffs = damping_multiplier_grid(n, m, r, p) * u.stream.coeffs
    return VelocityField(SpectralScalarField(n, coeffs))


def damping_sum_direct(u: VelocityField, m: int, r: float, p: CocycleParams,
                       method: str = "quadrature") -> VelocityField:
    """Term-by-term evaluation of S(u) over the basis table."""
    total = VelocityField.zeros(u.n)
    for _, h in kolmogorov_basis(m, r, u.n):
        total = total + t_operator(h, p) * roger_cocycle(u, h, p, method=method)
    return total


def viscous_term(u: VelocityField, nu: float) -> VelocityField:
    """νΔu as a velocity field (harmonic part untouched by Δ, so dropped)."""
    return VelocityField(laplacian(u.stream) * nu)
