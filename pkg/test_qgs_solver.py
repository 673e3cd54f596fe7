#!/usr/bin/env python3
"""
Tests for the QGS vorticity solver, the abstract Euler-Arnold form and the variational residual
"""
import numpy as np
import pytest
from scipy.integrate import solve_ivp

from src.models.errors import SolverInstabilityError
from src.models.extension import ExtendedElement
from src.models.fields import SpectralScalarField, VelocityField
from src.models.noise import KolmogorovBasis, TwoConstantFields
from src.models.solver_data import SigmaMode, SolverConfig
from src.services.qgs_solver import (
    EulerArnoldIntegrator,
    QGSSolver,
    TestDirection,
    dissipation,
    euler_arnold_rhs,
    initial_stream,
    rossby_frequency,
    rossby_wave,
    step,
    make_state,
    stream_from_vorticity,
    variational_residual,
    vorticity_rhs,
)
from src.utils.central_extension import viscosity_coefficient, viscous_term
from src.utils.torus_spectral import grad_perp, l2_norm, laplacian, random_band_limited, random_velocity


def normalised_stream(n, kmax, norm, seed):
    psi = random_band_limited(n, kmax, np.random.default_rng(seed))
    return psi * (norm / l2_norm(VelocityField(psi)))


def relative_error(a, b):
    return float(np.max(np.abs(a - b)) / max(1e-300, np.max(np.abs(b))))


# ==================== CONFIG ====================

def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(n=7, dt=1e-3)
    with pytest.raises(ValueError):
        SolverConfig(n=16, dt=0.0)
    with pytest.raises(ValueError):
        SolverConfig(n=16, dt=1e-3, nu=-1.0)
    config = SolverConfig(n=16, dt=0.01, steps=50, sigma_mode=SigmaMode.SPECTRAL)
    assert config.tau == pytest.approx(0.5)
    assert config.to_dict()['sigma_mode'] == 'spectral'


# ==================== ROSSBY WAVES ====================

@pytest.mark.parametrize("nu, sigma_mode", [
    (0.0, SigmaMode.NONE),
    (0.01, SigmaMode.NONE),
    (0.01, SigmaMode.SPECTRAL),
])
def test_rossby_wave_is_reproduced(nu, sigma_mode):
    config = SolverConfig(n=32, dt=1e-3, steps=200, beta=1.0, a=1.0, nu=nu, sigma_mode=sigma_mode, m=3)
    solver = QGSSolver(config, initial_stream("rossby", 32, 1, 2, 1e-3))
    final = solver.run()
    exact = rossby_wave(32, 1, 2, 1e-3, final.t, config)
    assert final.t == pytest.approx(0.2)
    assert np.max(np.abs(final.psi.coeffs - exact.coeffs)) < 1e-12


def test_rossby_waves_travel_westward():
    config = SolverConfig(n=16, dt=1e-3, beta=2.0, a=1.0)
    assert rossby_frequency(1, 2, config) == pytest.approx(-0.4)
    assert rossby_frequency(0, 3, config) == 0.0
    with pytest.raises(ValueError):
        rossby_wave(16, 0, 0, 1e-3, 0.0, config)


def test_zonal_flow_is_steady_without_dissipation():
    config = SolverConfig(n=16, dt=1e-2, steps=20, beta=1.0)
    psi0 = SpectralScalarField.from_function(16, lambda t1, t2: 0.1 * np.cos(2 * t2))
    final = QGSSolver(config, psi0).run()
    assert np.max(np.abs(final.psi.coeffs - psi0.coeffs)) < 1e-14


# ==================== CONSERVATION ====================

@pytest.mark.parametrize("beta", [0.0, 1.0])
def test_energy_and_enstrophy_are_conserved_without_dissipation(beta):
    config = SolverConfig(n=32, dt=1e-3, steps=100, beta=beta, a=1.0)
    solver = QGSSolver(config, random_band_limited(32, 5, np.random.default_rng(21), 0.01))
    first = solver.state
    last = solver.run()
    assert abs(last.energy - first.energy) < 1e-9 * first.energy
    assert abs(last.enstrophy - first.enstrophy) < 1e-9 * first.enstrophy


@pytest.mark.parametrize("beta", [0.0, 3.0])
def test_long_run_conserves_energy_of_order_one_field(beta):
    n = 64
    config = SolverConfig(n=n, dt=1e-3, steps=1000, beta=beta, a=1.0)
    solver = QGSSolver(config, normalised_stream(n, 4, 5.0, 24))
    first = solver.state
    assert first.energy == pytest.approx(12.5)
    last = solver.run()
    assert last.t == pytest.approx(1.0)
    assert abs(last.energy - first.energy) < 1e-9 * first.energy
    assert abs(last.enstrophy - first.enstrophy) < 1e-9 * first.enstrophy


def test_etdrk4_converges_at_least_second_order():
    n, tau = 32, 0.2
    psi0 = normalised_stream(n, 5, 5.0, 25)
    finals = []
    for dt in (0.01, 0.005, 0.0025):
        config = SolverConfig(n=n, dt=dt, steps=int(round(tau / dt)), beta=1.0, a=1.0, nu=0.01)
        finals.append(QGSSolver(config, psi0).run().psi.coeffs)
    coarse = relative_error(finals[0], finals[1])
    fine = relative_error(finals[1], finals[2])
    assert fine > 0.0
    assert coarse / fine >= 4.0


def test_energy_decreases_with_viscosity():
    config = SolverConfig(n=32, dt=1e-3, steps=50, beta=1.0, a=1.0, nu=0.05)
    solver = QGSSolver(config, random_band_limited(32, 5, np.random.default_rng(22), 0.01))
    solver.run()
    energies = np.array([s.energy for s in solver.history])
    assert np.all(np.diff(energies) < 0)
    assert len(solver.history) == config.steps + 1


def test_initial_mean_is_discarded():
    psi0 = SpectralScalarField.from_function(16, lambda t1, t2: 2.0 + np.cos(t1))
    solver = QGSSolver(SolverConfig(n=16, dt=1e-3), psi0)
    assert solver.state.psi.mean == 0.0


def test_solver_rejects_resolution_mismatch():
    with pytest.raises(ValueError):
        QGSSolver(SolverConfig(n=16, dt=1e-3), SpectralScalarField.zeros(32))


def test_non_finite_step_raises_instability():
    coeffs = np.zeros((16, 16), dtype=complex)
    coeffs[1, 2] = np.nan
    config = SolverConfig(n=16, dt=1e-3, steps=5)
    with pytest.raises(SolverInstabilityError) as info:
        step(make_state(0.0, SpectralScalarField(16, coeffs)), config)
    assert info.value.t == pytest.approx(1e-3)


def test_snapshot_callback_cadence():
    config = SolverConfig(n=16, dt=1e-3, steps=10, beta=1.0)
    seen = []
    QGSSolver(config, initial_stream("rossby", 16)).run(on_snapshot=lambda s: seen.append(s.t), snapshot_every=4)
    assert seen == pytest.approx([0.004, 0.008])


def test_initial_stream_kinds():
    assert l2_norm(VelocityField(initial_stream("zero", 16))) == 0.0
    random = initial_stream("random", 16, kmax=3, amplitude=0.5, seed=4)
    assert random.hermitian_defect() < 1e-15
    with pytest.raises(ValueError):
        initial_stream("vortex", 16)


# ==================== ETDRK4 ====================

def test_etdrk4_matches_high_order_oracle():
    n = 16
    config = SolverConfig(n=n, dt=1e-3, steps=50, beta=1.0, a=1.0, nu=0.01,
                          sigma_mode=SigmaMode.CONSTANT, sigma=0.1)
    psi0 = normalised_stream(n, 4, 0.5, 23)

    def rhs(t, y):
        return vorticity_rhs(stream_from_vorticity(y.reshape(n, n)), config).coeffs.ravel()

    oracle = solve_ivp(rhs, (0.0, config.tau), laplacian(psi0).coeffs.ravel(),
                       method="DOP853", rtol=1e-12, atol=1e-15)
    final = QGSSolver(config, psi0).run()
    expected = oracle.y[:, -1].reshape(n, n)
    assert relative_error(laplacian(final.psi).coeffs, expected) < 1e-8


# ==================== ABSTRACT FORM ====================

def test_curl_of_abstract_rhs_is_vorticity_rhs():
    n = 32
    config = SolverConfig(n=n, dt=1e-3, beta=0.7, a=1.3, nu=1e-3, sigma_mode=SigmaMode.CONSTANT, sigma=0.02)
    for seed in range(3):
        psi = normalised_stream(n, 5, 1.0, seed)
        u_hat = ExtendedElement(VelocityField(psi), config.a)
        abstract = euler_arnold_rhs(u_hat, None, config)
        assert abstract.a == 0.0
        curl = laplacian(abstract.u.stream).coeffs
        assert relative_error(curl, vorticity_rhs(psi, config).coeffs) < 1e-8


def test_noise_corrections_equal_viscosity_and_spectral_drag():
    n, m, r = 32, 3, 3.0
    config = SolverConfig(n=n, dt=1e-3, beta=1.0, nu=viscosity_coefficient(m, r),
                          sigma_mode=SigmaMode.SPECTRAL, m=m, r=r)
    u = VelocityField(normalised_stream(n, 4, 1.0, 31))
    with_noise = dissipation(u, KolmogorovBasis(m, r), config).stream.coeffs
    assert relative_error(with_noise, dissipation(u, None, config).stream.coeffs) < 1e-10


def test_two_constant_fields_give_pure_viscosity():
    n = 16
    config = SolverConfig(n=n, dt=1e-3, beta=1.0, sigma_mode=SigmaMode.CONSTANT, sigma=5.0)
    psi = SpectralScalarField.from_function(n, lambda t1, t2: np.sin(t1 + 2 * t2))
    decay = dissipation(VelocityField(psi), TwoConstantFields(0.25), config)
    # single mode decays at rate ν|k|²
    assert relative_error(decay.stream.coeffs, -0.25 * 5 * psi.coeffs) < 1e-12
    assert l2_norm(decay - viscous_term(VelocityField(psi), 0.25)) < 1e-12 * l2_norm(decay)


def test_trajectories_of_both_forms_agree():
    n = 32
    config = SolverConfig(n=n, dt=1e-3, steps=20, beta=1.0, a=1.0, nu=1e-3)
    psi0 = normalised_stream(n, 4, 0.1, 41)
    solver = QGSSolver(config, psi0)
    solver.run()
    marched = EulerArnoldIntegrator(config).trajectory(ExtendedElement(VelocityField(psi0), config.a), config.steps)
    assert len(marched) == config.steps + 1
    assert all(u_hat.a == config.a for u_hat in marched)
    diff = l2_norm(solver.velocity() - marched[-1].u) / l2_norm(solver.velocity())
    assert diff < 10 * config.dt ** 2


# ==================== VARIATIONAL RESIDUAL ====================

@pytest.fixture(scope="module")
def solved_trajectory():
    n = 32
    config = SolverConfig(n=n, dt=5e-3, steps=200, beta=1.0, a=1.0, nu=0.01)
    solver = QGSSolver(config, normalised_stream(n, 3, 0.1, 51))
    solver.run()
    history = solver.history
    times = np.array([s.t for s in history])
    trajectory = [ExtendedElement(VelocityField(s.psi), config.a) for s in history]
    return config, times, trajectory


def test_solutions_are_critical(solved_trajectory):
    config, times, trajectory = solved_trajectory
    rng = np.random.default_rng(52)
    for _ in range(3):
        v = random_velocity(config.n, 3, rng)
        field = ExtendedElement(v * (1.0 / l2_norm(v)), float(rng.standard_normal()))
        direction = TestDirection(field, t0=0.0, tau=config.tau)
        assert abs(variational_residual(trajectory, times, direction, config)) < 1e-5


def test_non_solution_has_large_residual(solved_trajectory):
    config, times, _ = solved_trajectory
    v_field = grad_perp(SpectralScalarField.from_function(config.n, lambda t1, t2: np.cos(t2)))
    constant = [ExtendedElement(v_field * 0.1, config.a)] * times.shape[0]
    direction = TestDirection(ExtendedElement(v_field, 0.0), t0=0.0, tau=config.tau)
    residual = abs(variational_residual(constant, times, direction, config))
    # ν·0.1·2π²·(2/π) from the viscous term alone
    assert residual == pytest.approx(config.nu * 0.1 * 2 * np.pi ** 2 * 2 / np.pi, rel=1e-3)


def test_direction_must_vanish_at_endpoints(solved_trajectory):
    config, times, trajectory = solved_trajectory
    field = ExtendedElement(VelocityField.zeros(config.n), 1.0)
    bad = TestDirection(field, t0=0.0, tau=config.tau, profile=np.cos, profile_rate=lambda t: -np.sin(t))
    with pytest.raises(ValueError, match="vanish"):
        variational_residual(trajectory, times, bad, config)
    shifted = TestDirection(field, t0=0.1, tau=config.tau)
    with pytest.raises(ValueError, match="time span"):
        variational_residual(trajectory, times, shifted, config)
    with pytest.raises(ValueError):
        variational_residual(trajectory[:-1], times, TestDirection(field, tau=config.tau), config)
