"""
FormulationSuite - vorticity solver, abstract Euler-Arnold form and the variational principle
"""
from typing import List

import numpy as np

from .verification_suite import CheckResult, VerificationSuite, relative
from ..models.extension import ExtendedElement
from ..models.fields import SpectralScalarField, VelocityField
from ..models.noise import KolmogorovBasis, TwoConstantFields
from ..models.solver_data import SigmaMode, SolverConfig
from ..services.qgs_solver import (
    EulerArnoldIntegrator,
    QGSSolver,
    TestDirection,
    dissipation,
    euler_arnold_rhs,
    variational_residual,
    vorticity_rhs,
)
from ..utils.central_extension import viscosity_coefficient, viscous_term
from ..utils.torus_spectral import grad_perp, l2_norm, laplacian, random_band_limited, random_velocity


def max_relative(a: np.ndarray, b: np.ndarray) -> float:
    return relative(float(np.max(np.abs(a - b))), float(np.max(np.abs(b))))


class FormulationSuite(VerificationSuite):
    """Equivalence of the two formulations and criticality of solver trajectories"""

    def __init__(self, seed: int = 0, n: int = 32, states: int = 5, directions: int = 10):
        super().__init__(seed)
        self.n = n
        self.states = states
        self.directions = directions

    def get_name(self) -> str:
        return "formulation"

    def get_description(self) -> str:
        return "vorticity form vs extended Euler-Arnold form; variational residual of solver trajectories"

    def _random_state(self, rng: np.random.Generator, kmax: int, norm: float) -> SpectralScalarField:
        psi = random_band_limited(self.n, kmax, rng)
        return psi * (norm / l2_norm(VelocityField(psi)))

    def _rhs_checks(self, rng: np.random.Generator) -> List[CheckResult]:
        config = SolverConfig(n=self.n, dt=1e-3, beta=1.0, a=1.0, nu=1e-3,
                              sigma_mode=SigmaMode.CONSTANT, sigma=1e-3)
        m, r = 3, 3.0
        spectral = SolverConfig(n=self.n, dt=1e-3, beta=1.0, a=1.0, nu=viscosity_coefficient(m, r),
                                sigma_mode=SigmaMode.SPECTRAL, m=m, r=r)
        pointwise = 0.0
        noise_form = 0.0
        no_friction = 0.0
        for _ in range(self.states):
            psi = self._random_state(rng, 5, 1.0)
            u_hat = ExtendedElement(VelocityField(psi), config.a)
            curl = laplacian(euler_arnold_rhs(u_hat, None, config).u.stream).coeffs
            pointwise = max(pointwise, max_relative(curl, vorticity_rhs(psi, config).coeffs))

            u = VelocityField(self._random_state(rng, 4, 1.0))
            with_noise = dissipation(u, KolmogorovBasis(m, r), spectral).stream.coeffs
            noise_form = max(noise_form, max_relative(with_noise, dissipation(u, None, spectral).stream.coeffs))
            two_field = dissipation(u, TwoConstantFields(0.25), config).stream.coeffs
            no_friction = max(no_friction, max_relative(two_field, viscous_term(u, 0.25).stream.coeffs))
        return [
            CheckResult.at_most("rhs_pointwise", pointwise, 1e-8),
            CheckResult.at_most("noise_corrections_vs_nu_sigma", noise_form, 1e-10),
            CheckResult.at_most("two_field_no_friction", no_friction, 1e-10),
        ]

    def _trajectory_check(self, rng: np.random.Generator) -> CheckResult:
        config = SolverConfig(n=self.n, dt=1e-3, steps=20, beta=1.0, a=1.0, nu=1e-3)
        psi0 = self._random_state(rng, 4, 0.1)
        solver = QGSSolver(config, psi0)
        solver.run()
        marched = EulerArnoldIntegrator(config).trajectory(ExtendedElement(VelocityField(psi0), config.a),
                                                           config.steps)
        diff = l2_norm(solver.velocity() - marched[-1].u) / l2_norm(solver.velocity())
        return CheckResult.at_most("trajectory_agreement", diff, 10 * config.dt ** 2)

    def _variational_checks(self, rng: np.random.Generator) -> List[CheckResult]:
        config = SolverConfig(n=self.n, dt=5e-3, steps=200, beta=1.0, a=1.0, nu=0.01)
        solver = QGSSolver(config, self._random_state(rng, 3, 0.1))
        solver.run()
        history = solver.history
        times = np.array([s.t for s in history])
        trajectory = [ExtendedElement(VelocityField(s.psi), config.a) for s in history]
        worst = 0.0
        for _ in range(self.directions):
            v = random_velocity(self.n, 3, rng)
            field = ExtendedElement(v * (1.0 / l2_norm(v)), float(rng.standard_normal()))
            direction = TestDirection(field, t0=0.0, tau=config.tau)
            worst = max(worst, abs(variational_residual(trajectory, times, direction, config)))

        # constant non-solution w = 0.1∇⊥cos θ₂ probed along V = ∇⊥cos θ₂
        v_field = grad_perp(SpectralScalarField.from_function(self.n, lambda t1, t2: np.cos(t2)))
        perturbed = [ExtendedElement(v_field * 0.1, config.a)] * times.shape[0]
        direction = TestDirection(ExtendedElement(v_field, 0.0), t0=0.0, tau=config.tau)
        off = abs(variational_residual(perturbed, times, direction, config))
        return [
            CheckResult.at_most("variational_residual_solution", worst, 1e-5),
            CheckResult.at_least("variational_residual_perturbed", off, 1e-3),
        ]

    def run_checks(self) -> List[CheckResult]:
        rng = self.rng()
        results = self._rhs_checks(rng)
        results.append(self._trajectory_check(rng))
        results.extend(self._variational_checks(rng))
        return results
