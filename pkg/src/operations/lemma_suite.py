"""
LemmaSuite - structure of T on the Kolmogorov basis and of the damping sum S
"""
from typing import List

import numpy as np

from .verification_suite import CheckResult, VerificationSuite, relative
from ..models.extension import BasisKind, CocycleParams
from ..models.fields import SpectralScalarField, VelocityField
from ..utils import spectral_grid
from ..utils.central_extension import (
    damping_multiplier,
    damping_multiplier_grid,
    damping_sum,
    damping_sum_direct,
    is_geodesic,
    kolmogorov_basis,
    t_operator,
)
from ..utils.torus_spectral import l2_inner, l2_norm, leray_project, random_band_limited


def quadrature_t(h: VelocityField, p: CocycleParams) -> VelocityField:
    """T h assembled as the Leray projection of ψ_h·α♯ with α♯ = (0, beta)."""
    psi = h.stream.to_grid()
    return leray_project(np.zeros_like(psi), p.beta * psi)


def random_l1_band(n: int, m: int, rng: np.random.Generator, amplitude: float = 1.0) -> VelocityField:
    """Random Hamiltonian field with stream modes |k|₁ ≤ m only"""
    psi = random_band_limited(n, m, rng, amplitude)
    k1, k2 = spectral_grid.wavenumbers(n)
    inside = (np.abs(k1) + np.abs(k2)) <= m
    return VelocityField(SpectralScalarField(n, np.where(inside, psi.coeffs, 0.0)))


class LemmaSuite(VerificationSuite):
    """T A_k ∝ B_k, T B_k ∝ −A_k; S is Fourier-diagonal, symmetric, negative semi-definite"""

    def __init__(self, seed: int = 0, n: int = 32, m: int = 3, r: float = 3.0, beta: float = 1.0,
                 samples: int = 10):
        super().__init__(seed)
        self.n = n
        self.m = m
        self.r = r
        self.params = CocycleParams(beta=beta)
        self.samples = samples

    def get_name(self) -> str:
        return "lemma"

    def get_description(self) -> str:
        return "T on basis fields and the damping sum S (diagonal, symmetric, <= 0)"

    def run_checks(self) -> List[CheckResult]:
        p = self.params
        table = kolmogorov_basis(self.m, self.r, self.n)
        fields = {(spec.kind, spec.k): h for spec, h in table}

        proportional = 0.0
        cross = 0.0
        quadrature = 0.0
        geodesic = all(is_geodesic(h) for _, h in table)
        for spec, h in table:
            c = p.beta * spec.k.k1 / spec.k.norm_sq
            if spec.kind is BasisKind.A:
                expected = fields[(BasisKind.B, spec.k)] * c
            else:
                expected = fields[(BasisKind.A, spec.k)] * (-c)
            t_h = quadrature_t(h, p)
            norm = l2_norm(h) ** 2
            proportional = max(proportional, l2_norm(t_h - expected) / l2_norm(h))
            quadrature = max(quadrature, l2_norm(t_h - t_operator(h, p)) / l2_norm(h))
            for other_spec, other in table:
                if other is fields[(BasisKind.B if spec.kind is BasisKind.A else BasisKind.A, spec.k)]:
                    continue
                cross = max(cross, abs(l2_inner(t_h, other)) / norm)

        rng = self.rng()
        grid = damping_multiplier_grid(self.n, self.m, self.r, p)
        diagonal = 0.0
        oracle = 0.0
        symmetric = 0.0
        definite = 0.0
        for _ in range(self.samples):
            u = random_l1_band(self.n, self.m, rng)
            v = random_l1_band(self.n, self.m, rng)
            su = damping_sum(u, self.m, self.r, p)
            sv = damping_sum(v, self.m, self.r, p)
            direct = damping_sum_direct(u, self.m, self.r, p)
            scale = l2_norm(su)
            diagonal = max(diagonal, relative(float(np.max(np.abs(su.stream.coeffs - grid * u.stream.coeffs))),
                                              float(np.max(np.abs(su.stream.coeffs)))))
            oracle = max(oracle, relative(l2_norm(direct - su), scale))
            symmetric = max(symmetric, relative(abs(l2_inner(su, v) - l2_inner(u, sv)), abs(l2_inner(su, v))))
            definite = max(definite, l2_inner(su, u))

        # closed-form D(k) against single-mode quadrature
        multipliers = 0.0
        for spec, h in table:
            if spec.kind is not BasisKind.B:
                continue
            measured = l2_inner(damping_sum_direct(h, self.m, self.r, p), h) / l2_norm(h) ** 2
            expected = damping_multiplier(spec.k, self.r, p)
            multipliers = max(multipliers, relative(abs(measured - expected), abs(expected)))

        return [
            CheckResult.at_most("basis_geodesic", 0.0 if geodesic else 1.0, 0.0),
            CheckResult.at_most("t_basis_proportional", proportional, 1e-10),
            CheckResult.at_most("t_cross_projections", cross, 1e-10),
            CheckResult.at_most("t_quadrature_vs_multiplier", quadrature, 1e-10),
            CheckResult.at_most("damping_fourier_diagonal", diagonal, 1e-10),
            CheckResult.at_most("damping_direct_vs_closed_form", oracle, 1e-10),
            CheckResult.at_most("damping_multiplier_oracle", multipliers, 1e-10),
            CheckResult.at_most("damping_symmetric", symmetric, 1e-10),
            CheckResult.at_most("damping_negative_semidefinite", definite, 1e-12),
        ]
