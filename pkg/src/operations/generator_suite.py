"""
GeneratorSuite - Σ(A_kA_k + B_kB_k)f = 2νΔf on the grid and by Monte Carlo
"""
from typing import List

import numpy as np

from .verification_suite import CheckResult, VerificationSuite, relative
from ..models.noise import KolmogorovBasis, NoiseModel, TwoConstantFields
from ..services.stochastic_flow import estimate_generator, point_ensemble, simulate, zero_drift
from ..utils.central_extension import generator_sum, kolmogorov_basis, viscosity_coefficient
from ..utils.torus_spectral import laplacian, random_band_limited

# Start point and test function of the Monte Carlo check
START = (0.3, 1.1)


def probe(points: np.ndarray) -> np.ndarray:
    return np.cos(points[:, 0]) + 0.5 * np.sin(points[:, 0] + points[:, 1])


def probe_laplacian(points: np.ndarray) -> np.ndarray:
    return -np.cos(points[:, 0]) - np.sin(points[:, 0] + points[:, 1])


class GeneratorSuite(VerificationSuite):
    """Generator identity for the Kolmogorov noise and its Monte Carlo counterpart"""

    def __init__(self, seed: int = 0, n: int = 32, m: int = 3, r: float = 3.0, functions: int = 10,
                 particles: int = 100_000, horizon: float = 0.01, dt: float = 0.001):
        super().__init__(seed)
        self.n = n
        self.m = m
        self.r = r
        self.functions = functions
        self.particles = particles
        self.horizon = horizon
        self.dt = dt

    def get_name(self) -> str:
        return "generator"

    def get_description(self) -> str:
        return "sum_k (A_k A_k + B_k B_k) f = 2 nu Laplacian f, grid and Monte Carlo (3 sigma)"

    def _monte_carlo(self, noise: NoiseModel, scheme: str):
        ensemble = point_ensemble(self.particles, START[0], START[1], seed=self.seed)
        paths = simulate(noise, zero_drift(self.n), 0.0, ensemble, self.dt, self.horizon, scheme=scheme)
        return estimate_generator(paths, probe)

    def run_checks(self) -> List[CheckResult]:
        rng = self.rng()
        fields = [h for _, h in kolmogorov_basis(self.m, self.r, self.n)]
        nu = viscosity_coefficient(self.m, self.r)
        grid = 0.0
        for _ in range(self.functions):
            f = random_band_limited(self.n, 4, rng)
            lhs = generator_sum(f, fields).coeffs
            rhs = (laplacian(f) * (2.0 * nu)).coeffs
            grid = max(grid, relative(float(np.max(np.abs(lhs - rhs))), float(np.max(np.abs(rhs)))))
        results = [CheckResult.at_most("generator_grid_identity", grid, 1e-10)]

        point = np.array([START])
        for label, noise in (('kolmogorov', KolmogorovBasis(1, self.r)), ('two_field', TwoConstantFields(0.5))):
            expected = noise.diffusion_coefficient() * float(probe_laplacian(point)[0])
            estimates = {}
            for scheme in ("heun", "euler_maruyama"):
                estimates[scheme] = self._monte_carlo(noise, scheme)
            value, stderr = estimates["heun"]
            results.append(CheckResult.at_most(f"mc_generator_{label}_sigmas",
                                               abs(value - expected) / stderr, 3.0))
            other, other_se = estimates["euler_maruyama"]
            results.append(CheckResult.at_most(f"heun_vs_euler_maruyama_{label}_sigmas",
                                               abs(value - other) / np.hypot(stderr, other_se), 3.0))
        return results
